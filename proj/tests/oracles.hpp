#pragma once

// Reference implementations used only by the tests. They deliberately share
// no code with the library beyond the data types.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <random>
#include <vector>

#include "forge/netlist.hpp"
#include "forge/tnn.hpp"

namespace oracle {

/// Gate-by-gate scalar evaluation; input bit i of `x` drives primary input i.
/// Returns the outputs packed LSB-first.
inline std::uint64_t eval(const forge::Netlist& net, std::uint64_t x) {
  std::vector<bool> v(net.signal_count());
  for (std::size_t i = 0; i < net.input_count(); ++i) v[i] = (x >> i) & 1U;
  for (std::size_t k = 0; k < net.gate_count(); ++k) {
    const auto& g = net.gates()[k];
    const bool a = v[g.a];
    const bool b = v[g.b];
    bool r = false;
    switch (g.fn) {
      case forge::GateFn::Const0: r = false; break;
      case forge::GateFn::Const1: r = true; break;
      case forge::GateFn::Buf: r = a; break;
      case forge::GateFn::Not: r = !a; break;
      case forge::GateFn::And: r = a && b; break;
      case forge::GateFn::Or: r = a || b; break;
      case forge::GateFn::Xor: r = a != b; break;
      case forge::GateFn::Nand: r = !(a && b); break;
      case forge::GateFn::Nor: r = !(a || b); break;
      case forge::GateFn::Xnor: r = a == b; break;
    }
    v[net.input_count() + k] = r;
  }
  std::uint64_t out = 0;
  for (std::size_t o = 0; o < net.output_count(); ++o) {
    if (v[net.outputs()[o]]) out |= 1ULL << o;
  }
  return out;
}

struct ArithmeticError {
  long double mae;
  std::uint64_t wcae;
};

/// Enumerates all inputs and compares against the integer popcount.
inline ArithmeticError popcount_error(const forge::Netlist& approx) {
  const std::size_t n = approx.input_count();
  std::uint64_t sum = 0, worst = 0;
  for (std::uint64_t x = 0; x < (1ULL << n); ++x) {
    const auto a = static_cast<std::int64_t>(eval(approx, x));
    const auto e = static_cast<std::int64_t>(std::popcount(x));
    const auto d = static_cast<std::uint64_t>(a > e ? a - e : e - a);
    sum += d;
    worst = std::max(worst, d);
  }
  return {static_cast<long double>(sum) / static_cast<long double>(1ULL << n), worst};
}

struct DistanceStats {
  long double mde = 0;
  std::uint64_t wcde = 0;
};

/// Distance metric of a one-output PCC netlist over all inputs.
inline DistanceStats pcc_distance(const forge::Netlist& pcc, std::size_t n_pos, std::size_t n_neg) {
  const std::size_t n = n_pos + n_neg;
  std::uint64_t sum = 0, worst = 0;
  for (std::uint64_t v = 0; v < (1ULL << n); ++v) {
    const std::int64_t x = std::popcount(v & ((1ULL << n_pos) - 1));
    const std::int64_t z = std::popcount(v >> n_pos);
    const bool exact = x >= z;
    const bool approx = eval(pcc, v) & 1U;
    if (exact != approx) {
      const auto d = static_cast<std::uint64_t>(x > z ? x - z : z - x);
      sum += d;
      worst = std::max(worst, d);
    }
  }
  return {static_cast<long double>(sum) / static_cast<long double>(1ULL << n), worst};
}

/// Evaluates every weight including zeros: a zero weight contributes 1/2 to
/// the class score, +1 contributes h, -1 contributes 1 - h.
inline std::size_t infer(const forge::TnnModel& m, const std::vector<std::uint8_t>& x) {
  std::vector<int> h(m.hidden_count);
  for (std::size_t k = 0; k < m.hidden_count; ++k) {
    int s = 0;
    for (std::size_t i = 0; i < m.input_count; ++i) s += m.hidden_weights[k][i] * static_cast<int>(x[i]);
    h[k] = s >= 0;
  }
  std::size_t best = 0;
  double best_score = -1e300;
  for (std::size_t c = 0; c < m.class_count; ++c) {
    double s = 0;
    for (std::size_t k = 0; k < m.hidden_count; ++k) {
      const int w = m.output_weights[c][k];
      s += w == 0 ? 0.5 : (w > 0 ? h[k] : 1 - h[k]);
    }
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

/// Indices not strictly dominated by any other point (minimization).
inline std::vector<std::size_t> nondominated(const std::vector<std::array<double, 2>>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
      dominated = pts[j][0] <= pts[i][0] && pts[j][1] <= pts[i][1] && (pts[j][0] < pts[i][0] || pts[j][1] < pts[i][1]);
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

/// Rank by repeated peeling of the non-dominated layer.
inline std::vector<int> ranks(const std::vector<std::array<double, 2>>& pts) {
  std::vector<int> rank(pts.size(), -1);
  std::vector<std::size_t> left(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) left[i] = i;
  for (int r = 0; !left.empty(); ++r) {
    std::vector<std::array<double, 2>> sub;
    for (std::size_t i : left) sub.push_back(pts[i]);
    const auto nd = nondominated(sub);
    std::vector<std::size_t> rest;
    std::size_t p = 0;
    for (std::size_t j = 0; j < left.size(); ++j) {
      if (p < nd.size() && nd[p] == j) {
        rank[left[j]] = r;
        ++p;
      } else {
        rest.push_back(left[j]);
      }
    }
    left = std::move(rest);
  }
  return rank;
}

/// Random netlist over the full gate set, `outputs` outputs drawn from the
/// last few signals.
inline forge::Netlist random_netlist(std::mt19937_64& rng, std::size_t inputs, std::size_t gates, std::size_t outputs) {
  std::vector<forge::Gate> g;
  for (std::size_t k = 0; k < gates; ++k) {
    const auto fn = forge::kAllGateFns[rng() % forge::kGateFnCount];
    const auto limit = inputs + k;
    g.push_back({fn, static_cast<forge::Signal>(rng() % limit), static_cast<forge::Signal>(rng() % limit)});
  }
  std::vector<forge::Signal> outs;
  for (std::size_t o = 0; o < outputs; ++o) outs.push_back(static_cast<forge::Signal>(rng() % (inputs + gates)));
  return forge::Netlist("random", inputs, std::move(g), std::move(outs));
}

}  // namespace oracle
