#include <doctest.h>

#include <bit>
#include <filesystem>

#include "forge/error.hpp"
#include "forge/pareto.hpp"
#include "forge/pcc.hpp"
#include "forge/random.hpp"
#include "oracles.hpp"

using namespace forge;

namespace {

PcLibrary small_library(const std::vector<std::size_t>& sizes) {
  CgpSearchConfig cfg;
  cfg.max_iterations = 300;
  cfg.time_limit = std::chrono::duration<double>(0.0);
  return build_pc_library(sizes, 2, cfg, 11);
}

}  // namespace

TEST_CASE("comparator is x >= z for every operand pair") {
  for (std::size_t w = 0; w <= 4; ++w) {
    const Netlist cmp = build_comparator(w);
    CHECK(cmp.input_count() == 2 * w);
    CHECK(cmp.output_count() == 1);
    for (std::uint64_t x = 0; x < (1ULL << w); ++x) {
      for (std::uint64_t z = 0; z < (1ULL << w); ++z) {
        REQUIRE(oracle::eval(cmp, x | (z << w)) == (x >= z ? 1U : 0U));
      }
    }
  }
  CHECK(area(build_comparator(1)) == 3.0);
  CHECK(area(build_comparator(4)) == 3.0 + 10.0 * 3);
}

TEST_CASE("comparator width covers the larger count") {
  CHECK(comparator_width(0, 0) == 0);
  CHECK(comparator_width(1, 0) == 1);
  CHECK(comparator_width(3, 4) == 3);
  CHECK(comparator_width(8, 8) == 4);
  CHECK(comparator_width(7, 2) == 3);
}

TEST_CASE("exact PCC computes popcount(pos) >= popcount(neg)") {
  for (auto [p, n] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {3, 2}, {4, 4}, {5, 0}, {0, 3}, {7, 6}}) {
    const PccCircuit pcc = assemble_pcc(build_exact_pc(p), build_exact_pc(n));
    CHECK(pcc.assembled.input_count() == p + n);
    for (std::uint64_t v = 0; v < (1ULL << (p + n)); ++v) {
      const int x = std::popcount(v & ((1ULL << p) - 1));
      const int z = std::popcount(v >> p);
      REQUIRE(oracle::eval(pcc.assembled, v) == (x >= z ? 1U : 0U));
    }
    const double parts = area(build_exact_pc(p)) + area(build_exact_pc(n)) + area(build_comparator(comparator_width(p, n)));
    CHECK(area(pcc.assembled) == parts);
  }
}

TEST_CASE("Pareto fronts agree with the peeling oracle") {
  Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Objectives> pts;
    std::vector<std::array<double, 2>> raw;
    const std::size_t n = 1 + uniform_below(rng, 30);
    for (std::size_t i = 0; i < n; ++i) {
      const Objectives o{static_cast<double>(uniform_below(rng, 8)), static_cast<double>(uniform_below(rng, 8))};
      pts.push_back(o);
      raw.push_back(o);
    }
    const auto fronts = nondominated_fronts(pts);
    const auto expect = oracle::ranks(raw);
    std::size_t seen = 0;
    for (std::size_t r = 0; r < fronts.size(); ++r) {
      for (std::size_t i : fronts[r]) REQUIRE(expect[i] == static_cast<int>(r));
      seen += fronts[r].size();
      const auto cd = crowding_distance(pts, fronts[r]);
      REQUIRE(cd.size() == fronts[r].size());
      for (double d : cd) CHECK(d >= 0.0);
    }
    CHECK(seen == n);
  }
}

TEST_CASE("candidate enumeration covers the cross product") {
  const PcLibrary lib = small_library({3, 4});
  PccEvalConfig cfg;
  const auto cands = enumerate_pcc_candidates(4, 3, lib, cfg, 9);
  CHECK(cands.size() == lib.entries(4).size() * lib.entries(3).size());
  std::size_t exact = 0;
  for (const auto& c : cands) {
    CHECK(c.distance.exhaustive);
    CHECK(c.estimated_area == area(c.pcc.pc_pos) + area(c.pcc.pc_neg));
    const auto o = oracle::pcc_distance(c.pcc.assembled, 4, 3);
    REQUIRE(c.mde() == doctest::Approx(static_cast<double>(o.mde)));
    REQUIRE(c.wcde() == o.wcde);
    if (c.exact) {
      ++exact;
      CHECK(c.mde() == 0.0);
    }
  }
  CHECK(exact == 1);
  for (const auto& c : cands) {
    if (c.pareto_rank != 0) continue;
    for (const auto& d : cands) {
      CHECK_FALSE(dominates({d.estimated_area, d.mde()}, {c.estimated_area, c.mde()}));
    }
  }
}

TEST_CASE("zero-sized operands use the empty popcount") {
  const PcLibrary lib = small_library({3});
  const auto cands = enumerate_pcc_candidates(3, 0, lib, PccEvalConfig{}, 1);
  CHECK(cands.size() == lib.entries(3).size());
  for (const auto& c : cands) CHECK(c.pcc.n_neg == 0);
}

TEST_CASE("Monte-Carlo candidates share their sample stream") {
  const PcLibrary lib = small_library({12});
  PccEvalConfig cfg;
  cfg.samples = 4000;
  cfg.exhaustive_limit = 10;
  const auto a = enumerate_pcc_candidates(12, 12, lib, cfg, 3);
  const auto b = enumerate_pcc_candidates(12, 12, lib, cfg, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK_FALSE(a[i].distance.exhaustive);
    CHECK(a[i].distance == b[i].distance);
    CHECK(a[i].distance.sample_count == 4000);
  }
}

TEST_CASE("Pareto filter keeps extremes and respects the cap") {
  const PcLibrary lib = small_library({5, 6});
  const auto cands = enumerate_pcc_candidates(6, 5, lib, PccEvalConfig{}, 2);
  const auto all = pareto_filter(cands);
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i].estimated_area >= all[i - 1].estimated_area);
    CHECK(all[i].mde() <= all[i - 1].mde());
  }
  const auto capped = pareto_filter(cands, 3);
  CHECK(capped.size() <= 3);
  REQUIRE_FALSE(capped.empty());
  CHECK(capped.front().estimated_area == all.front().estimated_area);
  CHECK(capped.back().estimated_area == all.back().estimated_area);
  CHECK_THROWS_AS(pareto_filter({}), ValidationError);
  CHECK_THROWS_AS(pareto_filter(cands, 1), ValidationError);
}

TEST_CASE("PCC library keeps the exact pair and round-trips") {
  const PcLibrary lib = small_library({3, 4});
  PccEvalConfig cfg;
  cfg.max_per_size = 4;
  const PccLibrary pccs = build_pcc_library({{4, 3}, {3, 3}, {4, 0}}, lib, cfg, 6);
  CHECK(pccs.by_pair.size() == 3);
  for (const auto& [key, list] : pccs.by_pair) {
    const auto& ex = list[pccs.exact_index(key.first, key.second)];
    CHECK(ex.exact);
    CHECK(ex.mde() == 0.0);
    for (const auto& e : list) CHECK(e.synthesized_area == area(e.pcc.assembled));
  }
  const auto dir = std::filesystem::temp_directory_path() / "forge_pcc_lib_test";
  std::filesystem::remove_all(dir);
  save_pcc_library(pccs, dir, "k");
  CHECK(pcc_library_key(dir) == "k");
  const PccLibrary back = load_pcc_library(dir);
  CHECK(back.total_entries() == pccs.total_entries());
  for (const auto& [key, list] : pccs.by_pair) {
    const auto& other = back.entries(key.first, key.second);
    REQUIRE(other.size() == list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
      CHECK(other[i].pcc.assembled == list[i].pcc.assembled);
      CHECK(other[i].distance == list[i].distance);
    }
  }
  std::filesystem::remove_all(dir);
}
