#pragma once

#include <cstdint>
#include <map>

#include <json.hpp>

#include "forge/bdd.hpp"
#include "forge/netlist.hpp"
#include "forge/pcc_circuit.hpp"
#include "forge/simulate.hpp"

namespace forge {

enum class Evaluator { Exhaustive, Bdd, Auto };

std::string_view to_string(Evaluator e);
Evaluator evaluator_from_string(std::string_view s);

/// Arithmetic error of an approximate circuit against its exact reference,
/// both read as unsigned LSB-first integers.
struct ArithmeticErrorReport {
  double mae = 0.0;
  std::uint64_t wcae = 0;
  Evaluator evaluated_via = Evaluator::Exhaustive;

  friend bool operator==(const ArithmeticErrorReport&, const ArithmeticErrorReport&) = default;
};

nlohmann::json to_json(const ArithmeticErrorReport& r);

inline constexpr std::size_t kDefaultExhaustiveLimit = 20;

/// Holds the reference outputs over all 2^n inputs so that many candidates
/// can be scored against the same reference.
class ExhaustiveErrorEvaluator {
 public:
  explicit ExhaustiveErrorEvaluator(const Netlist& exact,
                                    std::size_t input_limit = kDefaultExhaustiveLimit);
  ArithmeticErrorReport evaluate(const Netlist& approx) const;
  std::size_t input_count() const { return inputs_.rows(); }

 private:
  BitMatrix inputs_;
  BitMatrix exact_outputs_;
};

ArithmeticErrorReport eval_exhaustive(const Netlist& approx, const Netlist& exact,
                                      std::size_t input_limit = kDefaultExhaustiveLimit);

inline constexpr std::size_t kDefaultBddNodeBudget = std::size_t{1} << 22;

/// mae and wcae from decision diagrams of |approx - exact|: no enumeration.
ArithmeticErrorReport eval_bdd(const Netlist& approx, const Netlist& exact,
                               std::size_t node_budget = kDefaultBddNodeBudget);

/// Dispatches: exhaustive up to `exhaustive_limit` inputs, BDD above.
ArithmeticErrorReport eval_arithmetic(const Netlist& approx, const Netlist& exact,
                                      Evaluator evaluator,
                                      std::size_t exhaustive_limit = kDefaultExhaustiveLimit,
                                      std::size_t node_budget = kDefaultBddNodeBudget);

/// Relational distance: 0 when both relations agree, else the signed x - z.
constexpr std::int64_t distance(std::int64_t x, std::int64_t z, bool exact_rel, bool approx_rel) {
  return exact_rel == approx_rel ? 0 : x - z;
}

struct DistanceErrorReport {
  double mde = 0.0;
  std::uint64_t wcde = 0;  // observed maximum; a lower bound when sampled
  std::uint64_t sample_count = 0;
  double error_free_fraction = 1.0;
  std::map<std::int64_t, std::uint64_t> histogram;  // signed D -> count
  bool exhaustive = false;

  friend bool operator==(const DistanceErrorReport&, const DistanceErrorReport&) = default;
};

nlohmann::json to_json(const DistanceErrorReport& r);
DistanceErrorReport distance_report_from_json(const nlohmann::json& j);

/// How Monte-Carlo samples are drawn: uniform input bit-vectors (so x and z
/// are binomial) or uniform (x, z) value pairs realized by random bit subsets.
enum class SampleDistribution { InputVectors, ValuePairs };

DistanceErrorReport eval_pcc_mc(const PccCircuit& approx_pcc, std::uint64_t sample_count,
                                std::uint64_t rng_seed,
                                SampleDistribution dist = SampleDistribution::InputVectors);

DistanceErrorReport eval_pcc_exhaustive(const PccCircuit& approx_pcc,
                                        std::size_t input_limit = kDefaultExhaustiveLimit);

}  // namespace forge
