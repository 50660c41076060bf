#include <doctest.h>

#include <bit>
#include <filesystem>
#include <random>

#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/popcount.hpp"
#include "forge/simulate.hpp"
#include "oracles.hpp"

using namespace forge;

TEST_CASE("popcount width") {
  CHECK(popcount_width(0) == 0);
  CHECK(popcount_width(1) == 1);
  CHECK(popcount_width(3) == 2);
  CHECK(popcount_width(4) == 3);
  CHECK(popcount_width(8) == 4);
  CHECK(popcount_width(63) == 6);
  CHECK(popcount_width(64) == 7);
}

TEST_CASE("exact popcount is correct on every input") {
  for (std::size_t n = 0; n <= 12; ++n) {
    const Netlist pc = build_exact_pc(n);
    CHECK(pc.input_count() == n);
    CHECK(pc.output_count() == popcount_width(n));
    const BitMatrix out = simulate(pc, exhaustive_inputs(n));
    for (std::uint64_t v = 0; v < (1ULL << n); ++v) {
      REQUIRE(out.column_value(v) == static_cast<std::uint64_t>(std::popcount(v)));
    }
  }
}

TEST_CASE("exact PC(8) uses four full and three half adders") {
  CHECK(area(build_exact_pc(8)) == 4 * 12 + 3 * 5);
  CHECK(area(build_exact_pc(2)) == 5);
  CHECK(area(build_exact_pc(3)) == 12);
  CHECK(area(build_exact_pc(1)) == 0);
}

TEST_CASE("truncation ties low outputs to zero") {
  const Netlist t = build_truncated_pc(8, 1);
  CHECK(t.output_count() == 4);
  for (std::uint64_t v = 0; v < 256; ++v) {
    REQUIRE(oracle::eval(t, v) == (static_cast<std::uint64_t>(std::popcount(v)) & ~1ULL));
  }
  CHECK(area(t) < area(build_exact_pc(8)));
  CHECK(build_truncated_pc(8, 0) == build_exact_pc(8));
  CHECK_THROWS_AS(build_truncated_pc(8, 4), ValidationError);
}

TEST_CASE("truncation error equals half the parity rate") {
  for (std::size_t n : {4, 8, 10}) {
    const auto r = eval_exhaustive(build_truncated_pc(n, 1), build_exact_pc(n));
    CHECK(r.mae == 0.5);
    CHECK(r.wcae == 1);
  }
}

TEST_CASE("tau schedules are geometric with exact endpoints") {
  const TauSchedule s = tau_schedule(8, 5);
  REQUIRE(s.mae.size() == 5);
  CHECK(s.mae.front() == 0.1);
  CHECK(s.mae.back() == 4.0);
  CHECK(s.wcae.front() == 1.0);
  CHECK(s.wcae.back() == 4.0);
  for (std::size_t i = 1; i + 1 < 5; ++i) {
    CHECK(s.mae[i] * s.mae[i] == doctest::Approx(s.mae[i - 1] * s.mae[i + 1]));
    CHECK(s.mae[i] > s.mae[i - 1]);
  }
  CHECK(tau_schedule(60, 3).mae.back() == 32.0);
  CHECK_THROWS_AS(tau_schedule(8, 1), ValidationError);
}

TEST_CASE("CGP search respects the constraint and never grows") {
  CgpSearchConfig cfg;
  cfg.tau = 0.5;
  cfg.max_iterations = 3000;
  cfg.time_limit = std::chrono::duration<double>(0.0);
  std::vector<double> accepted;
  const PcLibraryEntry e = cgp_search(build_exact_pc(6), cfg, 3, [&](std::uint64_t, double a) { accepted.push_back(a); });
  for (std::size_t i = 1; i < accepted.size(); ++i) CHECK(accepted[i] <= accepted[i - 1]);
  CHECK(e.area <= area(build_exact_pc(6)));
  const auto o = oracle::popcount_error(e.netlist);
  CHECK(static_cast<double>(o.mae) <= 0.5);
  CHECK(e.mae == doctest::Approx(static_cast<double>(o.mae)));
  CHECK(e.wcae == o.wcae);
  CHECK(e.provenance == Provenance::Evolved);
  CHECK(e.iterations == 3000);
}

TEST_CASE("CGP search is deterministic per seed") {
  CgpSearchConfig cfg;
  cfg.tau = 1.0;
  cfg.error_metric = ErrorMetric::Wcae;
  cfg.max_iterations = 1500;
  cfg.time_limit = std::chrono::duration<double>(0.0);
  const auto a = cgp_search(build_exact_pc(5), cfg, 77);
  const auto b = cgp_search(build_exact_pc(5), cfg, 77);
  CHECK(a.netlist == b.netlist);
  CHECK(a.wcae <= 1);
}

TEST_CASE("CGP search with tau 0 keeps exactness") {
  CgpSearchConfig cfg;
  cfg.tau = 0.0;
  cfg.max_iterations = 2000;
  cfg.time_limit = std::chrono::duration<double>(0.0);
  const auto e = cgp_search(build_exact_pc(5), cfg, 1);
  CHECK(e.mae == 0.0);
}

TEST_CASE("CGP configuration is validated") {
  CgpSearchConfig cfg;
  cfg.lambda = 0;
  CHECK_THROWS_AS(cgp_search(build_exact_pc(4), cfg, 1), ValidationError);
  cfg.lambda = 4;
  cfg.max_iterations = 0;
  cfg.time_limit = std::chrono::duration<double>(0.0);
  CHECK_THROWS_AS(cgp_search(build_exact_pc(4), cfg, 1), ValidationError);
  cfg.max_iterations = 10;
  CHECK_THROWS_AS(cgp_search(build_truncated_pc(4, 2), cfg, 1), ValidationError);  // seed violates tau = 0
}

TEST_CASE("PC library build, persistence and verification") {
  CgpSearchConfig cfg;
  cfg.max_iterations = 400;
  cfg.time_limit = std::chrono::duration<double>(0.0);
  const PcLibrary lib = build_pc_library({4, 3, 4}, 3, cfg, 5);
  REQUIRE(lib.by_size.size() == 2);
  // exact + (width - 1) truncations + 2 * tau points
  CHECK(lib.entries(4).size() == 1 + 2 + 6);
  CHECK(lib.entries(3).size() == 1 + 1 + 6);
  CHECK(lib.exact(4).id == "pc4_exact");
  CHECK(lib.find("pc3_trunc1") != nullptr);
  CHECK(lib.find("pc4_wcae2") != nullptr);
  CHECK_NOTHROW(verify_pc_library(lib));

  for (const auto& [n, list] : lib.by_size) {
    std::vector<std::array<double, 2>> pts;
    for (const auto& e : list) pts.push_back({e.area, e.mae});
    const auto nd = oracle::nondominated(pts);
    for (std::size_t i = 0; i < list.size(); ++i) {
      CHECK(list[i].pareto == (std::find(nd.begin(), nd.end(), i) != nd.end()));
    }
  }

  const auto dir = std::filesystem::temp_directory_path() / "forge_pc_lib_test";
  std::filesystem::remove_all(dir);
  save_pc_library(lib, dir, "key123");
  CHECK(pc_library_key(dir) == "key123");
  const PcLibrary back = load_pc_library(dir);
  REQUIRE(back.total_entries() == lib.total_entries());
  for (const auto& [n, list] : lib.by_size) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      CHECK(back.entries(n)[i].netlist == list[i].netlist);
      CHECK(back.entries(n)[i].mae == list[i].mae);
    }
  }
  std::string text = read_text_file(dir / "pc_4.json");
  text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
  write_text_file(dir / "pc_4.json", text);
  CHECK_THROWS_AS(load_pc_library(dir), IoError);
  CHECK(pc_library_key(dir / "missing").empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("verification catches a tampered metric") {
  CgpSearchConfig cfg;
  cfg.max_iterations = 100;
  cfg.time_limit = std::chrono::duration<double>(0.0);
  PcLibrary lib = build_pc_library({3}, 2, cfg, 1);
  lib.by_size[3][1].mae += 0.25;
  CHECK_THROWS_AS(verify_pc_library(lib), ValidationError);
}
