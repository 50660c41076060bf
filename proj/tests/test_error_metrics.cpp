#include <doctest.h>

#include <random>

#include "forge/cgp.hpp"
#include "forge/error.hpp"
#include "forge/error_metrics.hpp"
#include "forge/pcc.hpp"
#include "forge/popcount.hpp"
#include "forge/random.hpp"
#include "oracles.hpp"

using namespace forge;

namespace {

Netlist mutant(const Netlist& exact, Rng& rng, std::size_t steps) {
  CgpGenotype g = encode(exact, default_cgp_columns(exact), default_cgp_columns(exact));
  for (std::size_t i = 0; i < steps; ++i) g = mutate(g, 3, rng);
  return decode(g);
}

}  // namespace

TEST_CASE("exhaustive error matches the enumeration oracle") {
  Rng rng(17);
  for (std::size_t n : {3, 5, 7}) {
    const Netlist exact = build_exact_pc(n);
    for (int i = 0; i < 30; ++i) {
      const Netlist m = mutant(exact, rng, 1 + i % 4);
      const auto r = eval_exhaustive(m, exact);
      const auto o = oracle::popcount_error(m);
      REQUIRE(r.mae == doctest::Approx(static_cast<double>(o.mae)).epsilon(1e-15));
      REQUIRE(r.wcae == o.wcae);
      CHECK(r.evaluated_via == Evaluator::Exhaustive);
    }
  }
}

TEST_CASE("BDD and exhaustive agree bit for bit") {
  Rng rng(23);
  for (std::size_t n : {4, 6, 9}) {
    const Netlist exact = build_exact_pc(n);
    for (int i = 0; i < 25; ++i) {
      const Netlist m = mutant(exact, rng, 1 + i % 5);
      const auto a = eval_exhaustive(m, exact);
      const auto b = eval_bdd(m, exact);
      REQUIRE(a.mae == b.mae);
      REQUIRE(a.wcae == b.wcae);
    }
  }
}

TEST_CASE("exact circuits have zero error") {
  for (std::size_t n : {1, 2, 8, 13}) {
    const auto r = eval_arithmetic(build_exact_pc(n), build_exact_pc(n), Evaluator::Auto);
    CHECK(r.mae == 0.0);
    CHECK(r.wcae == 0);
  }
  const auto big = eval_arithmetic(build_exact_pc(40), build_exact_pc(40), Evaluator::Auto);
  CHECK(big.evaluated_via == Evaluator::Bdd);
  CHECK(big.mae == 0.0);
}

TEST_CASE("exhaustive evaluation refuses large inputs") {
  CHECK_THROWS_AS(eval_exhaustive(build_exact_pc(21), build_exact_pc(21)), ValidationError);
  CHECK_THROWS_AS(eval_exhaustive(build_exact_pc(3), build_exact_pc(4)), ValidationError);
}

TEST_CASE("BDD node budget overflow is a resource error") {
  CHECK_THROWS_AS(eval_bdd(build_exact_pc(24), build_exact_pc(24), 64), ResourceError);
}

TEST_CASE("constant-zero PC error is the mean popcount") {
  for (std::size_t n : {4, 8}) {
    NetlistBuilder b(n);
    std::vector<Signal> outs(popcount_width(n), b.constant(false));
    const Netlist zero = b.build("zero", outs);
    const auto r = eval_bdd(zero, build_exact_pc(n));
    CHECK(r.mae == doctest::Approx(n / 2.0));
    CHECK(r.wcae == n);
  }
}

TEST_CASE("distance metric worked example") {
  // (0 vs 1) and (0 vs 4): both relations flip, so |D| is the operand gap
  CHECK(distance(0, 1, false, true) == -1);
  CHECK(distance(0, 4, false, true) == -4);
  CHECK(distance(3, 3, true, true) == 0);
  CHECK(distance(5, 2, true, false) == 3);
}

TEST_CASE("exact PCC has zero distance error, exhaustive and sampled") {
  const PccCircuit pcc = assemble_pcc(build_exact_pc(6), build_exact_pc(5));
  const auto ex = eval_pcc_exhaustive(pcc);
  CHECK(ex.mde == 0.0);
  CHECK(ex.wcde == 0);
  CHECK(ex.error_free_fraction == 1.0);
  CHECK(ex.sample_count == (1ULL << 11));
  for (std::uint64_t seed : {1, 2, 99}) {
    const auto mc = eval_pcc_mc(pcc, 50000, seed);
    CHECK(mc.mde == 0.0);
    CHECK(mc.wcde == 0);
    CHECK(mc.sample_count == 50000);
  }
}

TEST_CASE("PCC distance matches the enumeration oracle") {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const Netlist p = mutant(build_exact_pc(5), rng, 2);
    const Netlist q = mutant(build_exact_pc(4), rng, 2);
    const PccCircuit pcc = assemble_pcc(p, q);
    const auto r = eval_pcc_exhaustive(pcc);
    const auto o = oracle::pcc_distance(pcc.assembled, 5, 4);
    REQUIRE(r.mde == doctest::Approx(static_cast<double>(o.mde)).epsilon(1e-12));
    REQUIRE(r.wcde == o.wcde);
    std::uint64_t total = 0;
    for (const auto& [d, c] : r.histogram) total += c;
    CHECK(total == r.sample_count);
  }
}

TEST_CASE("Monte-Carlo estimate is deterministic per seed and close to exact") {
  Rng rng(5);
  const PccCircuit pcc = assemble_pcc(mutant(build_exact_pc(6), rng, 3), build_exact_pc(6));
  const auto a = eval_pcc_mc(pcc, 100000, 7);
  const auto b = eval_pcc_mc(pcc, 100000, 7);
  CHECK(a == b);
  const auto ex = eval_pcc_exhaustive(pcc);
  CHECK(std::abs(a.mde - ex.mde) < 0.03);
  CHECK(a.wcde <= ex.wcde);
  const auto pairs = eval_pcc_mc(pcc, 20000, 7, SampleDistribution::ValuePairs);
  CHECK(pairs.sample_count == 20000);
  CHECK_THROWS_AS(eval_pcc_mc(pcc, 0, 1), ValidationError);
}

TEST_CASE("distance report JSON round trip") {
  Rng rng(8);
  const PccCircuit pcc = assemble_pcc(mutant(build_exact_pc(4), rng, 3), build_exact_pc(3));
  const auto r = eval_pcc_exhaustive(pcc);
  CHECK(distance_report_from_json(to_json(r)) == r);
}
