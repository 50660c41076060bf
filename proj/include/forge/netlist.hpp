#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace forge {

/// The fixed two-input cell set. Index order is also the CGP function gene.
enum class GateFn : std::uint8_t { Const0, Const1, Buf, Not, And, Or, Xor, Nand, Nor, Xnor };

inline constexpr std::size_t kGateFnCount = 10;

inline constexpr std::array<GateFn, kGateFnCount> kAllGateFns = {
    GateFn::Const0, GateFn::Const1, GateFn::Buf, GateFn::Not, GateFn::And,
    GateFn::Or,     GateFn::Xor,    GateFn::Nand, GateFn::Nor, GateFn::Xnor};

constexpr int arity(GateFn fn) {
  switch (fn) {
    case GateFn::Const0:
    case GateFn::Const1:
      return 0;
    case GateFn::Buf:
    case GateFn::Not:
      return 1;
    default:
      return 2;
  }
}

std::string_view to_string(GateFn fn);
GateFn gate_fn_from_string(std::string_view name);

/// Word-parallel evaluation of one gate over 64 lanes.
constexpr std::uint64_t eval_gate(GateFn fn, std::uint64_t a, std::uint64_t b) {
  switch (fn) {
    case GateFn::Const0: return 0;
    case GateFn::Const1: return ~0ULL;
    case GateFn::Buf: return a;
    case GateFn::Not: return ~a;
    case GateFn::And: return a & b;
    case GateFn::Or: return a | b;
    case GateFn::Xor: return a ^ b;
    case GateFn::Nand: return ~(a & b);
    case GateFn::Nor: return ~(a | b);
    case GateFn::Xnor: return ~(a ^ b);
  }
  return 0;
}

/// Signal address: primary inputs occupy 0..n-1, gate k sits at n+k.
using Signal = std::uint32_t;

struct Gate {
  GateFn fn = GateFn::Const0;
  Signal a = 0;
  Signal b = 0;
  friend bool operator==(const Gate&, const Gate&) = default;
};

/// Topologically ordered combinational netlist over the fixed gate set.
/// Immutable once constructed; the constructor rejects forward or dangling
/// references.
class Netlist {
 public:
  Netlist() = default;
  Netlist(std::string name, std::size_t input_count, std::vector<Gate> gates,
          std::vector<Signal> outputs);

  const std::string& name() const { return name_; }
  std::size_t input_count() const { return input_count_; }
  std::size_t gate_count() const { return gates_.size(); }
  std::size_t output_count() const { return outputs_.size(); }
  std::size_t signal_count() const { return input_count_ + gates_.size(); }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<Signal>& outputs() const { return outputs_; }

  bool is_input(Signal s) const { return s < input_count_; }
  const Gate& gate_at(Signal s) const { return gates_[s - input_count_]; }

  /// Per-gate flag: true when the gate lies in the fan-in cone of an output.
  std::vector<bool> active_gates() const;
  std::size_t active_gate_count() const;

  /// Copy with inactive gates removed (order preserved).
  Netlist compacted() const;
  Netlist renamed(std::string name) const;

  /// True when some active gate reads primary input i.
  bool reads_input(std::size_t i) const;

  friend bool operator==(const Netlist& a, const Netlist& b) {
    return a.input_count_ == b.input_count_ && a.gates_ == b.gates_ && a.outputs_ == b.outputs_;
  }

 private:
  std::string name_;
  std::size_t input_count_ = 0;
  std::vector<Gate> gates_;
  std::vector<Signal> outputs_;
};

/// Incremental netlist construction with optional constant folding. Folding
/// drops gates whose value is decided by constant operands and elides BUFs;
/// CGP decoding disables it so the active graph is kept verbatim.
class NetlistBuilder {
 public:
  explicit NetlistBuilder(std::size_t input_count, bool fold_constants = true);

  std::size_t input_count() const { return input_count_; }
  Signal input(std::size_t i) const;
  Signal constant(bool value);
  Signal add(GateFn fn, Signal a = 0, Signal b = 0);

  Signal make_not(Signal a) { return add(GateFn::Not, a); }
  Signal make_and(Signal a, Signal b) { return add(GateFn::And, a, b); }
  Signal make_or(Signal a, Signal b) { return add(GateFn::Or, a, b); }
  Signal make_xor(Signal a, Signal b) { return add(GateFn::Xor, a, b); }
  Signal make_xnor(Signal a, Signal b) { return add(GateFn::Xnor, a, b); }
  Signal make_mux(Signal sel, Signal when_true, Signal when_false);

  /// Copies `sub` into this builder with its primary inputs bound to `inputs`;
  /// returns the signals carrying its outputs.
  std::vector<Signal> instantiate(const Netlist& sub, std::span<const Signal> inputs);

  /// Finalizes; inactive gates are dropped.
  Netlist build(std::string name, std::vector<Signal> outputs) const;

 private:
  int known_value(Signal s) const;  // -1 unknown, else 0/1

  std::size_t input_count_;
  bool fold_;
  std::vector<Gate> gates_;
  std::vector<std::int8_t> constant_of_;  // per signal
  Signal const_signal_[2];
  bool has_const_[2] = {false, false};
};

// JSON form: {name, inputs, outputs:[refs], gates:[{fn, a, b}]}
nlohmann::json to_json(const Netlist& netlist);
Netlist netlist_from_json(const nlohmann::json& j);

/// Structural Verilog: one primitive instantiation per line. Export only.
void write_verilog(std::ostream& out, const Netlist& netlist);
std::string to_verilog(const Netlist& netlist);

}  // namespace forge
