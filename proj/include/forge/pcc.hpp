#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forge/area.hpp"
#include "forge/error_metrics.hpp"
#include "forge/pcc_circuit.hpp"
#include "forge/popcount.hpp"

namespace forge {

/// Bits needed to hold either count: ceil(log2(max(n_pos, n_neg) + 1)).
std::size_t comparator_width(std::size_t n_pos, std::size_t n_neg);

/// 2*width inputs (x LSB-first, then z LSB-first), one output [x >= z].
/// width 0 compares two empty numbers and yields the constant 1.
Netlist build_comparator(std::size_t width);

/// Emits the comparator into `b` and returns the [x >= z] signal. The shorter
/// operand is zero-extended.
Signal emit_greater_equal(NetlistBuilder& b, std::span<const Signal> x, std::span<const Signal> z);

/// Positive PC, negative PC, zero extension, comparator. No constant folding
/// across the parts, so the assembled area is exactly the sum of the three.
PccCircuit assemble_pcc(const Netlist& pc_pos, const Netlist& pc_neg);

struct PccLibraryEntry {
  std::string id;
  std::string pos_id;
  std::string neg_id;
  PccCircuit pcc;
  double estimated_area = 0.0;    // area(pc_pos) + area(pc_neg)
  double synthesized_area = 0.0;  // area of the assembled netlist
  DistanceErrorReport distance;
  int pareto_rank = -1;
  bool exact = false;  // both PCs exact

  double mde() const { return distance.mde; }
  std::uint64_t wcde() const { return distance.wcde; }
};

nlohmann::json to_json(const PccLibraryEntry& e);
PccLibraryEntry pcc_entry_from_json(const nlohmann::json& j);

struct PccEvalConfig {
  std::uint64_t samples = 1000000;
  std::size_t exhaustive_limit = kDefaultExhaustiveLimit;
  SampleDistribution distribution = SampleDistribution::InputVectors;
  std::optional<std::size_t> max_per_size = 8;
  AreaTable area_table = AreaTable::defaults();
};

/// Cross product of all PC entries of both sizes. Every candidate of a pair
/// is sampled with the same seed, so their mde estimates are directly
/// comparable. Pareto ranks on (estimated_area, mde) are filled in.
std::vector<PccLibraryEntry> enumerate_pcc_candidates(std::size_t n_pos, std::size_t n_neg,
                                                      const PcLibrary& pc_library,
                                                      const PccEvalConfig& config, std::uint64_t rng_seed);

/// Non-dominated subset under (estimated_area, mde), sorted by area then mde.
/// With max_per_size, objective duplicates collapse and at most that many
/// entries remain, spread evenly over the area range with both extremes kept.
std::vector<PccLibraryEntry> pareto_filter(const std::vector<PccLibraryEntry>& candidates,
                                           std::optional<std::size_t> max_per_size = std::nullopt);

void synthesize_and_annotate(std::vector<PccLibraryEntry>& entries,
                             const AreaTable& table = AreaTable::defaults());

using PccKey = std::pair<std::size_t, std::size_t>;  // (n_pos, n_neg)

struct PccLibrary {
  std::map<PccKey, std::vector<PccLibraryEntry>> by_pair;

  const std::vector<PccLibraryEntry>& entries(std::size_t n_pos, std::size_t n_neg) const;
  /// Index of the exact x exact entry within entries(n_pos, n_neg).
  std::size_t exact_index(std::size_t n_pos, std::size_t n_neg) const;
  std::size_t total_entries() const;
};

/// Enumerate, filter and synthesize each pair. The exact pair is always kept,
/// even when another zero-error design is smaller.
PccLibrary build_pcc_library(const std::vector<PccKey>& pairs, const PcLibrary& pc_library,
                             const PccEvalConfig& config, std::uint64_t rng_seed);

void save_pcc_library(const PccLibrary& lib, const std::filesystem::path& dir, const std::string& key = {});
PccLibrary load_pcc_library(const std::filesystem::path& dir);
std::string pcc_library_key(const std::filesystem::path& dir);

}  // namespace forge
