#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace forge {

using uint128 = unsigned __int128;

/// Reduced ordered BDD manager without complement edges. Variable order is
/// the variable index order. Nodes are never freed; a manager lives for one
/// evaluation and is bounded by `node_budget`.
class BddManager {
 public:
  using Node = std::uint32_t;
  static constexpr Node kFalse = 0;
  static constexpr Node kTrue = 1;

  explicit BddManager(std::size_t var_count, std::size_t node_budget = std::size_t{1} << 22);

  std::size_t var_count() const { return var_count_; }
  std::size_t node_count() const { return nodes_.size(); }

  Node var(std::size_t index);
  Node negate(Node f) { return apply(Op::Xor, f, kTrue); }
  Node land(Node f, Node g) { return apply(Op::And, f, g); }
  Node lor(Node f, Node g) { return apply(Op::Or, f, g); }
  Node lxor(Node f, Node g) { return apply(Op::Xor, f, g); }

  /// Number of satisfying assignments over all var_count variables.
  uint128 sat_count(Node f);

 private:
  enum class Op : std::uint8_t { And, Or, Xor };

  struct NodeData {
    std::uint32_t var;
    Node lo;
    Node hi;
  };

  struct CacheSlot {
    Node f = 0;
    Node g = 0;
    Node result = 0;
    std::uint8_t op = 0xff;
  };

  Node make(std::uint32_t var, Node lo, Node hi);
  Node apply(Op op, Node f, Node g);

  std::size_t var_count_;
  std::size_t node_budget_;
  std::vector<NodeData> nodes_;
  std::unordered_map<std::uint64_t, Node> unique_;
  std::vector<CacheSlot> cache_;
  std::unordered_map<Node, uint128> count_memo_;
};

}  // namespace forge
