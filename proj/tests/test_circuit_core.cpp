#include <doctest.h>

#include <random>
#include <sstream>

#include "forge/area.hpp"
#include "forge/cgp.hpp"
#include "forge/error.hpp"
#include "forge/netlist.hpp"
#include "forge/random.hpp"
#include "forge/simulate.hpp"
#include "oracles.hpp"

using namespace forge;

TEST_CASE("gate truth tables") {
  const std::uint64_t a = 0b1100, b = 0b1010, m = 0b1111;
  CHECK((eval_gate(GateFn::And, a, b) & m) == 0b1000);
  CHECK((eval_gate(GateFn::Or, a, b) & m) == 0b1110);
  CHECK((eval_gate(GateFn::Xor, a, b) & m) == 0b0110);
  CHECK((eval_gate(GateFn::Nand, a, b) & m) == 0b0111);
  CHECK((eval_gate(GateFn::Nor, a, b) & m) == 0b0001);
  CHECK((eval_gate(GateFn::Xnor, a, b) & m) == 0b1001);
  CHECK((eval_gate(GateFn::Not, a, b) & m) == 0b0011);
  CHECK((eval_gate(GateFn::Buf, a, b) & m) == 0b1100);
  CHECK(eval_gate(GateFn::Const0, a, b) == 0);
  CHECK(eval_gate(GateFn::Const1, a, b) == ~0ULL);
  for (GateFn fn : kAllGateFns) CHECK(gate_fn_from_string(to_string(fn)) == fn);
  CHECK_THROWS_AS(gate_fn_from_string("MAJ"), ValidationError);
}

TEST_CASE("netlist construction rejects forward references and bad outputs") {
  CHECK_THROWS_AS(Netlist("x", 2, {{GateFn::And, 0, 2}}, {2}), ValidationError);
  CHECK_THROWS_AS(Netlist("x", 2, {{GateFn::And, 0, 1}}, {3}), ValidationError);
  CHECK_NOTHROW(Netlist("x", 2, {{GateFn::Not, 1, 7}}, {2}));  // b ignored for NOT
}

TEST_CASE("half adder simulates correctly") {
  const Netlist ha("ha", 2, {{GateFn::Xor, 0, 1}, {GateFn::And, 0, 1}}, {2, 3});
  const BitMatrix out = simulate(ha, exhaustive_inputs(2));
  for (std::size_t v = 0; v < 4; ++v) CHECK(out.column_value(v) == static_cast<std::uint64_t>(std::popcount(v)));
  CHECK(area(ha) == doctest::Approx(5.0));
}

TEST_CASE("simulate matches the scalar oracle on random netlists") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 9;
    const Netlist net = oracle::random_netlist(rng, n, 1 + rng() % 40, 1 + rng() % 5);
    const BitMatrix out = simulate(net, exhaustive_inputs(n));
    for (std::uint64_t v = 0; v < (1ULL << n); ++v) REQUIRE(out.column_value(v) == oracle::eval(net, v));
  }
}

TEST_CASE("simulate checks the input row count") {
  const Netlist inv("inv", 1, {{GateFn::Not, 0, 0}}, {1});
  CHECK_THROWS_AS(simulate(inv, BitMatrix(2, 4)), ValidationError);
}

TEST_CASE("exhaustive inputs enumerate integers per lane") {
  for (std::size_t n : {0, 1, 3, 6, 7, 9}) {
    const BitMatrix m = exhaustive_inputs(n);
    CHECK(m.vector_count() == (1ULL << n));
    for (std::uint64_t v = 0; v < m.vector_count(); ++v) REQUIRE(m.column_value(v) == v);
  }
  CHECK_THROWS_AS(exhaustive_inputs(31), ResourceError);
}

TEST_CASE("builder folds constants and elides buffers") {
  NetlistBuilder b(2);
  const Signal one = b.constant(true);
  CHECK(b.make_and(b.input(0), one) == b.input(0));
  CHECK(b.constant(true) == one);
  CHECK(b.add(GateFn::Buf, b.input(1)) == b.input(1));
  const Signal zero = b.make_and(b.input(0), b.constant(false));
  const Netlist net = b.build("fold", {zero, b.make_or(b.input(1), one)});
  CHECK(net.active_gate_count() == 2);  // the two constants
  CHECK(area(net) == 0.0);
}

TEST_CASE("builder without folding keeps gates verbatim") {
  NetlistBuilder b(1, false);
  const Signal one = b.constant(true);
  const Signal y = b.make_and(b.input(0), one);
  const Netlist net = b.build("raw", {y});
  CHECK(net.gate_count() == 2);
}

TEST_CASE("instantiate binds sub-circuit inputs") {
  const Netlist ha("ha", 2, {{GateFn::Xor, 0, 1}, {GateFn::And, 0, 1}}, {2, 3});
  NetlistBuilder b(3);
  const auto first = b.instantiate(ha, std::vector<Signal>{0, 1});
  const auto second = b.instantiate(ha, std::vector<Signal>{first[0], 2});
  const Netlist net = b.build("chain", {second[0]});
  for (std::uint64_t v = 0; v < 8; ++v) CHECK(oracle::eval(net, v) == (std::popcount(v) & 1U));
  CHECK_THROWS_AS(b.instantiate(ha, std::vector<Signal>{0}), ValidationError);
}

TEST_CASE("compaction removes inactive gates and preserves function") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Netlist net = oracle::random_netlist(rng, 5, 30, 2);
    const Netlist c = net.compacted();
    CHECK(c.gate_count() == net.active_gate_count());
    CHECK(area(c) == area(net));
    for (std::uint64_t v = 0; v < 32; ++v) REQUIRE(oracle::eval(c, v) == oracle::eval(net, v));
  }
}

TEST_CASE("netlist JSON round trip") {
  std::mt19937_64 rng(3);
  const Netlist net = oracle::random_netlist(rng, 4, 20, 3);
  const Netlist back = netlist_from_json(to_json(net));
  CHECK(back == net);
  CHECK(back.name() == net.name());
  CHECK_THROWS_AS(netlist_from_json(nlohmann::json{{"inputs", 1}}), ValidationError);
}

TEST_CASE("verilog export lists one primitive per gate") {
  const Netlist ha("half adder", 2, {{GateFn::Xor, 0, 1}, {GateFn::And, 0, 1}}, {2, 3});
  const std::string v = to_verilog(ha);
  CHECK(v.find("module half_adder") != std::string::npos);
  CHECK(v.find("xor") != std::string::npos);
  CHECK(v.find("and") != std::string::npos);
  CHECK(v.find("endmodule") != std::string::npos);
}

TEST_CASE("area table defaults and overrides") {
  const AreaTable t = AreaTable::defaults();
  CHECK(t.cost(GateFn::Not) == 1.0);
  CHECK(t.cost(GateFn::And) == 2.0);
  CHECK(t.cost(GateFn::Nor) == 2.0);
  CHECK(t.cost(GateFn::Xnor) == 3.0);
  CHECK(t.cost(GateFn::Buf) == 0.0);
  AreaTable custom = AreaTable::from_json({{"XOR", 5.0}});
  CHECK(custom.cost(GateFn::Xor) == 5.0);
  CHECK(custom.cost(GateFn::And) == 2.0);
  custom.erase(GateFn::And);
  const Netlist and2("and", 2, {{GateFn::And, 0, 1}}, {2});
  CHECK_THROWS_AS(area(and2, custom), ConfigError);
  CHECK_THROWS_AS(custom.set(GateFn::Or, -1.0), ValidationError);
}

TEST_CASE("CGP encode/decode preserves function") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Netlist net = oracle::random_netlist(rng, 6, 25, 3).compacted();
    const CgpGenotype g = encode(net, 100, 100);
    CHECK_NOTHROW(g.validate());
    const Netlist back = decode(g);
    for (std::uint64_t v = 0; v < 64; ++v) REQUIRE(oracle::eval(back, v) == oracle::eval(net, v));
    CHECK(area(back) == area(net));
  }
}

TEST_CASE("CGP encode reports the required capacity") {
  std::mt19937_64 rng(1);
  const Netlist net = oracle::random_netlist(rng, 3, 12, 1);
  try {
    encode(net, 5, 5);
    FAIL("expected CapacityError");
  } catch (const CapacityError& e) {
    CHECK(e.required_columns() == 12);
  }
}

TEST_CASE("CGP mutation always yields valid genotypes") {
  std::mt19937_64 rng(9);
  const Netlist net = oracle::random_netlist(rng, 5, 20, 3).compacted();
  CgpGenotype g = encode(net, 40, 10);
  Rng mrng(42);
  for (int i = 0; i < 2000; ++i) {
    g = mutate(g, 5, mrng);
    REQUIRE_NOTHROW(g.validate());
    const Netlist d = decode(g);
    REQUIRE(d.input_count() == 5);
    REQUIRE(d.output_count() == 3);
  }
}

TEST_CASE("genotype validation names the bad gene") {
  std::mt19937_64 rng(2);
  CgpGenotype g = encode(oracle::random_netlist(rng, 3, 4, 1).compacted(), 10, 10);
  g.genes[3 * 2 + 1] = 99;
  try {
    g.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("gene 7") != std::string::npos);
  }
}

TEST_CASE("seed derivation is stable and stage-sensitive") {
  CHECK(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  CHECK(derive_seed(1, "a", 0) != derive_seed(2, "a", 0));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK(uniform_below(rng, 7) < 7);
    const double u = uniform_unit(rng);
    CHECK((u >= 0.0 && u < 1.0));
  }
}
