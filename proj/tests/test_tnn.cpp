#include <doctest.h>

#include <filesystem>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/random.hpp"
#include "forge/tnn.hpp"
#include "oracles.hpp"

using namespace forge;

namespace {

const std::filesystem::path kData = FORGE_TEST_DATA;

std::vector<std::uint8_t> bits_of(std::uint64_t v, std::size_t n) {
  std::vector<std::uint8_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (v >> i) & 1U;
  return x;
}

TnnModel random_model(Rng& rng, std::size_t in, std::size_t hid, std::size_t cls, bool equal_n) {
  TnnModel m;
  m.name = "rand";
  m.input_count = in;
  m.hidden_count = hid;
  m.class_count = cls;
  m.thresholds.assign(in, 0.5);
  m.hidden_weights.assign(hid, std::vector<int>(in));
  for (auto& row : m.hidden_weights)
    for (auto& w : row) w = static_cast<int>(uniform_below(rng, 3)) - 1;
  m.output_weights.assign(cls, std::vector<int>(hid));
  const std::size_t zeros = uniform_below(rng, hid);
  for (std::size_t c = 0; c < cls; ++c) {
    const std::size_t nz = equal_n ? zeros : uniform_below(rng, hid);
    for (std::size_t k = 0; k < hid; ++k) m.output_weights[c][k] = k < nz ? 0 : (bernoulli(rng, 0.5) ? 1 : -1);
  }
  return m;
}

}  // namespace

TEST_CASE("fig2 model loads and validates") {
  const TnnModel m = load_model(kData / "fig2" / "model.json");
  CHECK(m.input_count == 3);
  CHECK(m.hidden_count == 2);
  CHECK(m.class_count == 2);
  const auto v = validate_model(m);
  CHECK(v.equal_zero_count);
  const auto req = neuron_requirements(m);
  REQUIRE(req.hidden.size() == 2);
  CHECK(req.hidden[0].n_pos() == 1);
  CHECK(req.hidden[0].n_neg() == 1);
  CHECK(req.hidden[1].n_pos() == 1);
  CHECK(req.hidden[1].n_neg() == 2);
  CHECK(req.output[0].inverted == std::vector<bool>{false, true});
}

TEST_CASE("exact inference matches the full-weight oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const TnnModel m = random_model(rng, 1 + uniform_below(rng, 7), 1 + uniform_below(rng, 5), 2 + uniform_below(rng, 3), trial % 2 == 0);
    const auto v = validate_model(m, ValidationMode::Lenient);
    CHECK(v.class_offsets.size() == m.class_count);
    for (std::uint64_t x = 0; x < (1ULL << m.input_count); ++x) {
      const auto bits = bits_of(x, m.input_count);
      REQUIRE(infer_exact(m, bits) == oracle::infer(m, bits));
    }
  }
}

TEST_CASE("exact netlist agrees with software inference") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const TnnModel m = random_model(rng, 1 + uniform_below(rng, 8), 1 + uniform_below(rng, 5), 2 + uniform_below(rng, 3), trial % 3 != 0);
    const Netlist net = generate_netlist(m, TnnSelection::exact(m));
    CHECK(net.input_count() == m.input_count);
    CHECK(net.output_count() == m.class_count);
    const auto pred = predict(net, exhaustive_inputs(m.input_count));
    for (std::uint64_t x = 0; x < (1ULL << m.input_count); ++x) {
      REQUIRE(pred[x] == infer_exact(m, bits_of(x, m.input_count)));
      REQUIRE(std::popcount(oracle::eval(net, x)) == 1);
    }
  }
}

TEST_CASE("argmax picks the lowest index on ties and ignores shifts") {
  const std::vector<std::int64_t> s{3, 7, 7, 1};
  CHECK(argmax(s) == 1);
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::int64_t> v(2 + uniform_below(rng, 6));
    for (auto& x : v) x = static_cast<std::int64_t>(uniform_below(rng, 9));
    const std::int64_t c = static_cast<std::int64_t>(uniform_below(rng, 1000)) - 500;
    std::vector<std::int64_t> w = v;
    for (auto& x : w) x += c;
    REQUIRE(argmax(v) == argmax(w));
  }
}

TEST_CASE("strict validation rejects unequal zero counts") {
  TnnModel m = load_model(kData / "fig2" / "model.json");
  m.output_weights[1][0] = 0;
  CHECK_THROWS_AS(validate_model(m), ValidationError);
  const auto v = validate_model(m, ValidationMode::Lenient);
  CHECK_FALSE(v.equal_zero_count);
  CHECK(v.class_offsets[0] == 0.0);
  CHECK(v.class_offsets[1] == 0.5);
  CHECK_FALSE(v.warnings.empty());
  m.hidden_weights[0][0] = 2;
  CHECK_THROWS_AS(validate_model(m, ValidationMode::Lenient), ValidationError);
}

TEST_CASE("model JSON shape checks") {
  const TnnModel m = load_model(kData / "fig2" / "model.json");
  nlohmann::json j = to_json(m);
  CHECK(model_from_json(j).hidden_weights == m.hidden_weights);
  j["topology"] = {3, 3, 2};
  CHECK_THROWS_AS(model_from_json(j), ValidationError);
  CHECK_THROWS_AS(load_model(kData / "missing.json"), IoError);
}

TEST_CASE("CSV ingestion binarizes at the train median") {
  const std::string csv =
      "a,b,label\n"
      "0,5,x\n1,5,y\n2,5,x\n3,5,y\n4,5,x\n5,5,y\n6,5,x\n7,5,y\n8,5,x\n9,5,y\n";
  IngestOptions opt;
  opt.split_fraction = 1.0;
  const BinaryDataset d = ingest_csv_text(csv, opt);
  CHECK(d.feature_count() == 2);
  CHECK(d.class_names == std::vector<std::string>{"x", "y"});
  CHECK(d.stats[0].median == doctest::Approx(0.5));
  CHECK(d.stats[1].constant);
  CHECK_FALSE(d.warnings.empty());
  std::size_t ones = 0;
  for (const auto& row : d.samples) {
    ones += row[0];
    CHECK(row[1] == 0);
  }
  CHECK(ones == 5);
  CHECK(d.rows(Split::Test).empty());
}

TEST_CASE("split is a seeded deterministic partition") {
  std::string csv = "f,label\n";
  for (int i = 0; i < 50; ++i) csv += std::to_string(i) + "," + std::to_string(i % 3) + "\n";
  IngestOptions opt;
  opt.rng_seed = 4;
  const auto a = ingest_csv_text(csv, opt);
  const auto b = ingest_csv_text(csv, opt);
  CHECK(a.split == b.split);
  CHECK(a.rows(Split::Train).size() == 35);
  CHECK(a.rows(Split::Test).size() == 15);
  opt.rng_seed = 5;
  CHECK(ingest_csv_text(csv, opt).split != a.split);
}

TEST_CASE("malformed CSV is an I/O error, a bad label column a validation error") {
  CHECK_THROWS_AS(ingest_csv_text("a,b\n1\n", {}), IoError);
  CHECK_THROWS_AS(ingest_csv_text("a,b,label\n1,zz,0\n2,3,1\n", {}), IoError);
  IngestOptions opt;
  opt.label_column = "nope";
  CHECK_THROWS_AS(ingest_csv_text("a,b\n1,2\n", opt), ValidationError);
}

TEST_CASE("fig2 dataset: netlist and model accuracy agree") {
  const TnnModel m = load_model(kData / "fig2" / "model.json");
  IngestOptions opt;
  opt.label_column = "label";
  opt.split_fraction = 1.0;
  opt.thresholds = m.thresholds;
  const BinaryDataset d = ingest(kData / "fig2" / "fig2.csv", opt);
  const Netlist net = generate_netlist(m, TnnSelection::exact(m));
  CHECK(accuracy(net, d, Split::Train) == accuracy(m, d, Split::Train));
  CHECK(accuracy(m, d, Split::Train) == 1.0);
  CHECK_THROWS_AS(accuracy(m, d, Split::Test), ValidationError);
}

TEST_CASE("toy training respects the equal-N constraint") {
  std::string csv = "f0,f1,f2,f3,label\n";
  Rng rng(2);
  for (int i = 0; i < 120; ++i) {
    const int a = static_cast<int>(uniform_below(rng, 100));
    const int b = static_cast<int>(uniform_below(rng, 100));
    csv += fmt::format("{},{},{},{},{}\n", a, b, uniform_below(rng, 100), uniform_below(rng, 100), a > b ? 1 : 0);
  }
  const BinaryDataset d = ingest_csv_text(csv, {});
  ToyTrainConfig cfg;
  cfg.hidden = 3;
  cfg.zero_count = 1;
  cfg.iterations = 300;
  const TnnModel m = train_toy_model(d, cfg);
  const auto v = validate_model(m);
  CHECK(v.equal_zero_count);
  CHECK(v.zero_counts == std::vector<std::size_t>{1, 1});
  CHECK(accuracy(m, d, Split::Train) >= 0.5);
}
