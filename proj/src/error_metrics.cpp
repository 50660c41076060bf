#include "forge/error_metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/random.hpp"

namespace forge {

namespace {

/// |A - B| as a vector of bit functions, LSB first. `T` is either a 64-lane
/// word or a BDD node; `ops` supplies and/or/xor/not and the constant zero.
template <class T, class Ops>
std::vector<T> abs_difference(const std::vector<T>& a, const std::vector<T>& b, Ops& ops) {
  const std::size_t width = std::max(a.size(), b.size());
  std::vector<T> diff(width);
  T borrow = ops.zero();
  for (std::size_t i = 0; i < width; ++i) {
    const T ai = i < a.size() ? a[i] : ops.zero();
    const T bi = i < b.size() ? b[i] : ops.zero();
    const T t = ops.lxor(ai, bi);
    diff[i] = ops.lxor(t, borrow);
    borrow = ops.lor(ops.land(ops.lnot(ai), bi), ops.land(ops.lnot(t), borrow));
  }
  // borrow out is the sign; conditionally negate
  const T sign = borrow;
  T carry = sign;
  for (std::size_t i = 0; i < width; ++i) {
    const T x = ops.lxor(diff[i], sign);
    diff[i] = ops.lxor(x, carry);
    carry = ops.land(x, carry);
  }
  return diff;
}

struct WordOps {
  std::uint64_t zero() const { return 0; }
  std::uint64_t land(std::uint64_t a, std::uint64_t b) const { return a & b; }
  std::uint64_t lor(std::uint64_t a, std::uint64_t b) const { return a | b; }
  std::uint64_t lxor(std::uint64_t a, std::uint64_t b) const { return a ^ b; }
  std::uint64_t lnot(std::uint64_t a) const { return ~a; }
};

struct BddOps {
  BddManager& m;
  BddManager::Node zero() const { return BddManager::kFalse; }
  BddManager::Node land(BddManager::Node a, BddManager::Node b) { return m.land(a, b); }
  BddManager::Node lor(BddManager::Node a, BddManager::Node b) { return m.lor(a, b); }
  BddManager::Node lxor(BddManager::Node a, BddManager::Node b) { return m.lxor(a, b); }
  BddManager::Node lnot(BddManager::Node a) { return m.negate(a); }
};

double scaled_mean(uint128 sum, std::size_t input_count) {
  return std::ldexp(static_cast<double>(sum), -static_cast<int>(input_count));
}

std::vector<BddManager::Node> build_bdd(BddManager& m, const Netlist& netlist) {
  std::vector<BddManager::Node> value(netlist.signal_count());
  for (std::size_t i = 0; i < netlist.input_count(); ++i) value[i] = m.var(i);
  const auto active = netlist.active_gates();
  for (std::size_t k = 0; k < netlist.gate_count(); ++k) {
    if (!active[k]) continue;
    const Gate& g = netlist.gates()[k];
    const auto a = value[g.a];
    const auto b = value[g.b];
    BddManager::Node r = BddManager::kFalse;
    switch (g.fn) {
      case GateFn::Const0: r = BddManager::kFalse; break;
      case GateFn::Const1: r = BddManager::kTrue; break;
      case GateFn::Buf: r = a; break;
      case GateFn::Not: r = m.negate(a); break;
      case GateFn::And: r = m.land(a, b); break;
      case GateFn::Or: r = m.lor(a, b); break;
      case GateFn::Xor: r = m.lxor(a, b); break;
      case GateFn::Nand: r = m.negate(m.land(a, b)); break;
      case GateFn::Nor: r = m.negate(m.lor(a, b)); break;
      case GateFn::Xnor: r = m.negate(m.lxor(a, b)); break;
    }
    value[netlist.input_count() + k] = r;
  }
  std::vector<BddManager::Node> outs;
  for (Signal s : netlist.outputs()) outs.push_back(value[s]);
  return outs;
}

void check_same_inputs(const Netlist& approx, const Netlist& exact) {
  if (approx.input_count() != exact.input_count()) {
    throw ValidationError(fmt::format("input count mismatch: approx {} vs exact {}",
                                      approx.input_count(), exact.input_count()));
  }
}

}  // namespace

std::string_view to_string(Evaluator e) {
  switch (e) {
    case Evaluator::Exhaustive: return "EXHAUSTIVE";
    case Evaluator::Bdd: return "BDD";
    case Evaluator::Auto: return "AUTO";
  }
  return "?";
}

Evaluator evaluator_from_string(std::string_view s) {
  if (s == "EXHAUSTIVE") return Evaluator::Exhaustive;
  if (s == "BDD") return Evaluator::Bdd;
  if (s == "AUTO") return Evaluator::Auto;
  throw ValidationError(fmt::format("unknown evaluator '{}'", s));
}

nlohmann::json to_json(const ArithmeticErrorReport& r) {
  return {{"mae", r.mae}, {"wcae", r.wcae}, {"evaluated_via", to_string(r.evaluated_via)}};
}

// ---------------------------------------------------------------------------

ExhaustiveErrorEvaluator::ExhaustiveErrorEvaluator(const Netlist& exact, std::size_t input_limit) {
  if (exact.input_count() > input_limit) {
    throw ValidationError(fmt::format(
        "{} inputs exceed the exhaustive limit of {}; use the BDD evaluator instead",
        exact.input_count(), input_limit));
  }
  inputs_ = exhaustive_inputs(exact.input_count());
  exact_outputs_ = simulate(exact, inputs_);
}

ArithmeticErrorReport ExhaustiveErrorEvaluator::evaluate(const Netlist& approx) const {
  if (approx.input_count() != inputs_.rows()) {
    throw ValidationError(fmt::format("input count mismatch: approx {} vs exact {}",
                                      approx.input_count(), inputs_.rows()));
  }
  const BitMatrix approx_out = simulate(approx, inputs_);
  WordOps ops;
  uint128 sum = 0;
  std::uint64_t worst = 0;
  std::vector<std::uint64_t> a(approx_out.rows()), b(exact_outputs_.rows());
  for (std::size_t w = 0; w < inputs_.words_per_row(); ++w) {
    for (std::size_t r = 0; r < a.size(); ++r) a[r] = approx_out.row(r)[w];
    for (std::size_t r = 0; r < b.size(); ++r) b[r] = exact_outputs_.row(r)[w];
    const auto diff = abs_difference(a, b, ops);
    const std::uint64_t mask = inputs_.lane_mask(w);
    std::uint64_t lanes = mask;
    std::uint64_t word_max = 0;
    for (std::size_t i = diff.size(); i-- > 0;) {
      const std::uint64_t bits = diff[i] & mask;
      sum += static_cast<uint128>(std::popcount(bits)) << i;
      const std::uint64_t t = lanes & bits;
      if (t != 0) {
        lanes = t;
        word_max |= 1ULL << i;
      }
    }
    worst = std::max(worst, word_max);
  }
  return {scaled_mean(sum, inputs_.rows()), worst, Evaluator::Exhaustive};
}

ArithmeticErrorReport eval_exhaustive(const Netlist& approx, const Netlist& exact,
                                      std::size_t input_limit) {
  check_same_inputs(approx, exact);
  return ExhaustiveErrorEvaluator(exact, input_limit).evaluate(approx);
}

ArithmeticErrorReport eval_bdd(const Netlist& approx, const Netlist& exact, std::size_t node_budget) {
  check_same_inputs(approx, exact);
  const std::size_t n = exact.input_count();
  BddManager m(n, node_budget);
  const auto a = build_bdd(m, approx);
  const auto b = build_bdd(m, exact);
  BddOps ops{m};
  const auto diff = abs_difference(a, b, ops);
  uint128 sum = 0;
  for (std::size_t j = 0; j < diff.size(); ++j) sum += m.sat_count(diff[j]) << j;
  std::uint64_t worst = 0;
  BddManager::Node reach = BddManager::kTrue;
  for (std::size_t j = diff.size(); j-- > 0;) {
    const auto t = m.land(reach, diff[j]);
    if (t != BddManager::kFalse) {
      reach = t;
      worst |= 1ULL << j;
    }
  }
  return {scaled_mean(sum, n), worst, Evaluator::Bdd};
}

ArithmeticErrorReport eval_arithmetic(const Netlist& approx, const Netlist& exact, Evaluator evaluator,
                                      std::size_t exhaustive_limit, std::size_t node_budget) {
  if (evaluator == Evaluator::Auto) {
    evaluator = exact.input_count() <= exhaustive_limit ? Evaluator::Exhaustive : Evaluator::Bdd;
  }
  return evaluator == Evaluator::Exhaustive ? eval_exhaustive(approx, exact, exhaustive_limit)
                                            : eval_bdd(approx, exact, node_budget);
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const DistanceErrorReport& r) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [d, count] : r.histogram) hist.push_back({d, count});
  return {{"mde", r.mde},
          {"wcde", r.wcde},
          {"sample_count", r.sample_count},
          {"error_free_fraction", r.error_free_fraction},
          {"exhaustive", r.exhaustive},
          {"histogram", std::move(hist)}};
}

DistanceErrorReport distance_report_from_json(const nlohmann::json& j) {
  DistanceErrorReport r;
  r.mde = j.at("mde").get<double>();
  r.wcde = j.at("wcde").get<std::uint64_t>();
  r.sample_count = j.at("sample_count").get<std::uint64_t>();
  r.error_free_fraction = j.at("error_free_fraction").get<double>();
  r.exhaustive = j.at("exhaustive").get<bool>();
  for (const auto& pair : j.at("histogram")) {
    r.histogram[pair.at(0).get<std::int64_t>()] = pair.at(1).get<std::uint64_t>();
  }
  return r;
}

namespace {

/// Streams samples of a PCC and accumulates the distance statistics.
class DistanceAccumulator {
 public:
  DistanceAccumulator(std::size_t n_pos, std::size_t n_neg) : n_pos_(n_pos), n_neg_(n_neg) {}

  void add(const BitMatrix& inputs, const BitMatrix& approx_out) {
    WordOps ops;
    for (std::size_t w = 0; w < inputs.words_per_row(); ++w) {
      const auto x = count_rows(inputs, 0, n_pos_, w);
      const auto z = count_rows(inputs, n_pos_, n_pos_ + n_neg_, w);
      // x >= z  <=>  no borrow out of x - z
      std::uint64_t borrow = 0;
      const std::size_t width = std::max(x.size(), z.size());
      for (std::size_t i = 0; i < width; ++i) {
        const std::uint64_t xi = i < x.size() ? x[i] : 0;
        const std::uint64_t zi = i < z.size() ? z[i] : 0;
        const std::uint64_t t = ops.lxor(xi, zi);
        borrow = (~xi & zi) | (~t & borrow);
      }
      const std::uint64_t exact_rel = ~borrow;
      const std::uint64_t mask = inputs.lane_mask(w);
      const std::uint64_t approx_rel = approx_out.rows() > 0 ? approx_out.row(0)[w] : 0;
      std::uint64_t wrong = (exact_rel ^ approx_rel) & mask;
      const auto agree = static_cast<std::uint64_t>(std::popcount(mask & ~wrong));
      if (agree) histogram_[0] += agree;
      samples_ += static_cast<std::uint64_t>(std::popcount(mask));
      while (wrong) {
        const int lane = std::countr_zero(wrong);
        wrong &= wrong - 1;
        const auto d = distance(lane_value(x, lane), lane_value(z, lane),
                                ((exact_rel >> lane) & 1U) != 0, ((approx_rel >> lane) & 1U) != 0);
        ++histogram_[d];
        const auto mag = static_cast<std::uint64_t>(d < 0 ? -d : d);
        abs_sum_ += mag;
        worst_ = std::max(worst_, mag);
      }
    }
  }

  DistanceErrorReport report(bool exhaustive) const {
    DistanceErrorReport r;
    r.sample_count = samples_;
    r.mde = samples_ ? static_cast<double>(abs_sum_) / static_cast<double>(samples_) : 0.0;
    r.wcde = worst_;
    const auto it = histogram_.find(0);
    const std::uint64_t zero = it == histogram_.end() ? 0 : it->second;
    r.error_free_fraction = samples_ ? static_cast<double>(zero) / static_cast<double>(samples_) : 1.0;
    r.histogram = histogram_;
    r.exhaustive = exhaustive;
    return r;
  }

 private:
  static std::vector<std::uint64_t> count_rows(const BitMatrix& m, std::size_t begin, std::size_t end,
                                               std::size_t w) {
    std::size_t width = 0;
    while ((std::size_t{1} << width) <= end - begin) ++width;
    std::vector<std::uint64_t> slices(width, 0);
    for (std::size_t r = begin; r < end; ++r) {
      std::uint64_t carry = m.row(r)[w];
      for (std::size_t k = 0; k < width && carry; ++k) {
        const std::uint64_t t = slices[k] & carry;
        slices[k] ^= carry;
        carry = t;
      }
    }
    return slices;
  }

  static std::int64_t lane_value(const std::vector<std::uint64_t>& slices, int lane) {
    std::int64_t v = 0;
    for (std::size_t k = 0; k < slices.size(); ++k) v |= static_cast<std::int64_t>((slices[k] >> lane) & 1U) << k;
    return v;
  }

  std::size_t n_pos_;
  std::size_t n_neg_;
  std::map<std::int64_t, std::uint64_t> histogram_;
  std::uint64_t samples_ = 0;
  std::uint64_t abs_sum_ = 0;
  std::uint64_t worst_ = 0;
};

void check_pcc(const PccCircuit& pcc) {
  if (pcc.assembled.input_count() != pcc.n_pos + pcc.n_neg || pcc.assembled.output_count() != 1) {
    throw ValidationError(fmt::format("PCC({}, {}) assembled netlist has {} inputs / {} outputs",
                                      pcc.n_pos, pcc.n_neg, pcc.assembled.input_count(),
                                      pcc.assembled.output_count()));
  }
}

}  // namespace

DistanceErrorReport eval_pcc_mc(const PccCircuit& approx_pcc, std::uint64_t sample_count,
                                std::uint64_t rng_seed, SampleDistribution dist) {
  check_pcc(approx_pcc);
  if (sample_count == 0) throw ValidationError("sample_count must be >= 1");
  const std::size_t n = approx_pcc.n_pos + approx_pcc.n_neg;
  constexpr std::uint64_t kChunk = 64 * 1024;
  Rng rng(rng_seed);
  DistanceAccumulator acc(approx_pcc.n_pos, approx_pcc.n_neg);
  std::vector<std::size_t> order;
  for (std::uint64_t done = 0; done < sample_count;) {
    const std::uint64_t batch = std::min(kChunk, sample_count - done);
    BitMatrix inputs(n, batch);
    if (dist == SampleDistribution::InputVectors) {
      for (std::size_t w = 0; w < inputs.words_per_row(); ++w) {
        for (std::size_t r = 0; r < n; ++r) inputs.row(r)[w] = rng() & inputs.lane_mask(w);
      }
    } else {
      for (std::uint64_t s = 0; s < batch; ++s) {
        const std::size_t groups[2][2] = {{0, approx_pcc.n_pos}, {approx_pcc.n_pos, approx_pcc.n_neg}};
        for (const auto& g : groups) {
          const std::size_t ones = uniform_below(rng, g[1] + 1);
          order.resize(g[1]);
          std::iota(order.begin(), order.end(), std::size_t{0});
          for (std::size_t k = 0; k < ones; ++k) {
            const std::size_t j = k + uniform_below(rng, g[1] - k);
            std::swap(order[k], order[j]);
            inputs.set(g[0] + order[k], s, true);
          }
        }
      }
    }
    acc.add(inputs, simulate(approx_pcc.assembled, inputs));
    done += batch;
  }
  return acc.report(false);
}

DistanceErrorReport eval_pcc_exhaustive(const PccCircuit& approx_pcc, std::size_t input_limit) {
  check_pcc(approx_pcc);
  const std::size_t n = approx_pcc.n_pos + approx_pcc.n_neg;
  if (n > input_limit) {
    throw ValidationError(fmt::format("PCC with {} inputs exceeds the exhaustive limit of {}", n, input_limit));
  }
  const BitMatrix inputs = exhaustive_inputs(n);
  DistanceAccumulator acc(approx_pcc.n_pos, approx_pcc.n_neg);
  acc.add(inputs, simulate(approx_pcc.assembled, inputs));
  return acc.report(true);
}

}  // namespace forge
