#include "forge/bdd.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

namespace {
constexpr std::size_t kCacheSize = std::size_t{1} << 18;
constexpr std::size_t kMaxVars = 1023;
constexpr std::size_t kMaxNodes = std::size_t{1} << 27;
}  // namespace

BddManager::BddManager(std::size_t var_count, std::size_t node_budget)
    : var_count_(var_count), node_budget_(std::min(node_budget, kMaxNodes)), cache_(kCacheSize) {
  if (var_count > kMaxVars) {
    throw ResourceError(fmt::format("BDD manager supports at most {} variables", kMaxVars));
  }
  const auto terminal = static_cast<std::uint32_t>(var_count);
  nodes_.push_back({terminal, kFalse, kFalse});
  nodes_.push_back({terminal, kTrue, kTrue});
}

BddManager::Node BddManager::var(std::size_t index) {
  if (index >= var_count_) throw ValidationError(fmt::format("BDD variable {} out of range", index));
  return make(static_cast<std::uint32_t>(index), kFalse, kTrue);
}

BddManager::Node BddManager::make(std::uint32_t var, Node lo, Node hi) {
  if (lo == hi) return lo;
  const std::uint64_t key = (static_cast<std::uint64_t>(var) << 54) |
                            (static_cast<std::uint64_t>(lo) << 27) | static_cast<std::uint64_t>(hi);
  auto it = unique_.find(key);
  if (it != unique_.end()) return it->second;
  if (nodes_.size() >= node_budget_) {
    throw ResourceError(
        fmt::format("BDD node budget exceeded: {} nodes (budget {})", nodes_.size(), node_budget_));
  }
  const Node id = static_cast<Node>(nodes_.size());
  nodes_.push_back({var, lo, hi});
  unique_.emplace(key, id);
  return id;
}

BddManager::Node BddManager::apply(Op op, Node f, Node g) {
  switch (op) {
    case Op::And:
      if (f == kFalse || g == kFalse) return kFalse;
      if (f == kTrue) return g;
      if (g == kTrue || f == g) return f;
      break;
    case Op::Or:
      if (f == kTrue || g == kTrue) return kTrue;
      if (f == kFalse) return g;
      if (g == kFalse || f == g) return f;
      break;
    case Op::Xor:
      if (f == kFalse) return g;
      if (g == kFalse) return f;
      if (f == g) return kFalse;
      if (f == kTrue && g == kTrue) return kFalse;
      break;
  }
  if (f > g) std::swap(f, g);
  const std::size_t slot =
      (static_cast<std::size_t>(f) * 0x9E3779B1u + static_cast<std::size_t>(g) * 0x85EBCA77u +
       static_cast<std::size_t>(op)) & (kCacheSize - 1);
  const CacheSlot& hit = cache_[slot];
  if (hit.op == static_cast<std::uint8_t>(op) && hit.f == f && hit.g == g) return hit.result;

  const NodeData nf = nodes_[f];
  const NodeData ng = nodes_[g];
  const std::uint32_t top = std::min(nf.var, ng.var);
  const Node f0 = nf.var == top ? nf.lo : f;
  const Node f1 = nf.var == top ? nf.hi : f;
  const Node g0 = ng.var == top ? ng.lo : g;
  const Node g1 = ng.var == top ? ng.hi : g;
  const Node lo = apply(op, f0, g0);
  const Node hi = apply(op, f1, g1);
  const Node result = make(top, lo, hi);
  cache_[slot] = {f, g, result, static_cast<std::uint8_t>(op)};
  return result;
}

uint128 BddManager::sat_count(Node f) {
  // counts over variables [var(node), var_count)
  auto rec = [this](auto&& self, Node n) -> uint128 {
    if (n == kFalse) return 0;
    if (n == kTrue) return 1;
    auto it = count_memo_.find(n);
    if (it != count_memo_.end()) return it->second;
    const NodeData d = nodes_[n];
    const uint128 lo = self(self, d.lo) << (nodes_[d.lo].var - d.var - 1);
    const uint128 hi = self(self, d.hi) << (nodes_[d.hi].var - d.var - 1);
    const uint128 total = lo + hi;
    count_memo_.emplace(n, total);
    return total;
  };
  return rec(rec, f) << nodes_[f].var;
}

}  // namespace forge
