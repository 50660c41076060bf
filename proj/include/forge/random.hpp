#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace forge {

// mt19937_64 output is fully specified by the standard, unlike the
// std:: distributions, so all sampling below goes through our own helpers.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a; used for seed derivation and content checksums.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Stage seed = mix(master, stage label, index). Every random stream in the
/// pipeline is keyed this way from one master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index = 0);

/// Uniform integer in [0, bound). bound must be > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// Uniform double in [0, 1).
double uniform_unit(Rng& rng);

bool bernoulli(Rng& rng, double p);

}  // namespace forge
