#include "forge/netlist.hpp"

#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

namespace {

constexpr std::array<std::string_view, kGateFnCount> kGateNames = {
    "CONST0", "CONST1", "BUF", "NOT", "AND", "OR", "XOR", "NAND", "NOR", "XNOR"};

}  // namespace

std::string_view to_string(GateFn fn) { return kGateNames[static_cast<std::size_t>(fn)]; }

GateFn gate_fn_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kGateFnCount; ++i) {
    if (kGateNames[i] == name) return static_cast<GateFn>(i);
  }
  throw ValidationError(fmt::format("unknown gate function '{}'", name));
}

Netlist::Netlist(std::string name, std::size_t input_count, std::vector<Gate> gates,
                 std::vector<Signal> outputs)
    : name_(std::move(name)),
      input_count_(input_count),
      gates_(std::move(gates)),
      outputs_(std::move(outputs)) {
  for (std::size_t k = 0; k < gates_.size(); ++k) {
    Gate& g = gates_[k];
    const std::size_t self = input_count_ + k;
    const int n = arity(g.fn);
    if (n < 2) g.b = 0;
    if (n < 1) g.a = 0;
    if (n >= 1 && g.a >= self) {
      throw ValidationError(
          fmt::format("netlist '{}': gate {} operand a={} is not an earlier signal", name_, k, g.a));
    }
    if (n == 2 && g.b >= self) {
      throw ValidationError(
          fmt::format("netlist '{}': gate {} operand b={} is not an earlier signal", name_, k, g.b));
    }
  }
  for (std::size_t i = 0; i < outputs_.size(); ++i) {
    if (outputs_[i] >= signal_count()) {
      throw ValidationError(
          fmt::format("netlist '{}': output {} references missing signal {}", name_, i, outputs_[i]));
    }
  }
}

std::vector<bool> Netlist::active_gates() const {
  std::vector<bool> active(gates_.size(), false);
  for (Signal s : outputs_) {
    if (!is_input(s)) active[s - input_count_] = true;
  }
  for (std::size_t k = gates_.size(); k-- > 0;) {
    if (!active[k]) continue;
    const Gate& g = gates_[k];
    const int n = arity(g.fn);
    if (n >= 1 && !is_input(g.a)) active[g.a - input_count_] = true;
    if (n == 2 && !is_input(g.b)) active[g.b - input_count_] = true;
  }
  return active;
}

std::size_t Netlist::active_gate_count() const {
  std::size_t count = 0;
  for (bool a : active_gates()) count += a;
  return count;
}

Netlist Netlist::compacted() const {
  const auto active = active_gates();
  std::vector<Signal> remap(signal_count());
  for (std::size_t i = 0; i < input_count_; ++i) remap[i] = static_cast<Signal>(i);
  std::vector<Gate> kept;
  kept.reserve(gates_.size());
  for (std::size_t k = 0; k < gates_.size(); ++k) {
    if (!active[k]) continue;
    Gate g = gates_[k];
    g.a = remap[g.a];
    g.b = remap[g.b];
    remap[input_count_ + k] = static_cast<Signal>(input_count_ + kept.size());
    kept.push_back(g);
  }
  std::vector<Signal> outs;
  outs.reserve(outputs_.size());
  for (Signal s : outputs_) outs.push_back(remap[s]);
  return Netlist(name_, input_count_, std::move(kept), std::move(outs));
}

Netlist Netlist::renamed(std::string name) const {
  Netlist copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

bool Netlist::reads_input(std::size_t i) const {
  for (Signal s : outputs_) {
    if (s == i) return true;
  }
  const auto active = active_gates();
  for (std::size_t k = 0; k < gates_.size(); ++k) {
    if (!active[k]) continue;
    const int n = arity(gates_[k].fn);
    if ((n >= 1 && gates_[k].a == i) || (n == 2 && gates_[k].b == i)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

NetlistBuilder::NetlistBuilder(std::size_t input_count, bool fold_constants)
    : input_count_(input_count), fold_(fold_constants), constant_of_(input_count, -1),
      const_signal_{0, 0} {}

Signal NetlistBuilder::input(std::size_t i) const {
  if (i >= input_count_) throw ValidationError(fmt::format("builder has no input {}", i));
  return static_cast<Signal>(i);
}

int NetlistBuilder::known_value(Signal s) const { return fold_ ? constant_of_[s] : -1; }

Signal NetlistBuilder::constant(bool value) {
  const int v = value ? 1 : 0;
  if (fold_ && has_const_[v]) return const_signal_[v];
  const Signal s = static_cast<Signal>(input_count_ + gates_.size());
  gates_.push_back({value ? GateFn::Const1 : GateFn::Const0, 0, 0});
  constant_of_.push_back(static_cast<std::int8_t>(v));
  const_signal_[v] = s;
  has_const_[v] = true;
  return s;
}

Signal NetlistBuilder::add(GateFn fn, Signal a, Signal b) {
  const std::size_t next = input_count_ + gates_.size();
  const int n = arity(fn);
  if ((n >= 1 && a >= next) || (n == 2 && b >= next)) {
    throw ValidationError("builder operand references a signal not yet created");
  }
  if (fold_) {
    if (fn == GateFn::Const0) return constant(false);
    if (fn == GateFn::Const1) return constant(true);
    if (fn == GateFn::Buf) return a;
    const int va = known_value(a);
    if (n == 1) {
      if (va >= 0) return constant(va == 0);
    } else {
      const int vb = known_value(b);
      if (va >= 0 && vb >= 0) {
        return constant((eval_gate(fn, va ? ~0ULL : 0, vb ? ~0ULL : 0) & 1) != 0);
      }
      if (va >= 0 || vb >= 0) {
        const int c = va >= 0 ? va : vb;
        const Signal x = va >= 0 ? b : a;
        switch (fn) {
          case GateFn::And: return c ? x : constant(false);
          case GateFn::Or: return c ? constant(true) : x;
          case GateFn::Xor: return c ? add(GateFn::Not, x) : x;
          case GateFn::Nand: return c ? add(GateFn::Not, x) : constant(true);
          case GateFn::Nor: return c ? constant(false) : add(GateFn::Not, x);
          case GateFn::Xnor: return c ? x : add(GateFn::Not, x);
          default: break;
        }
      }
    }
  }
  if (n < 2) b = 0;
  if (n < 1) a = 0;
  gates_.push_back({fn, a, b});
  constant_of_.push_back(fn == GateFn::Const0 ? 0 : fn == GateFn::Const1 ? 1 : -1);
  return static_cast<Signal>(next);
}

Signal NetlistBuilder::make_mux(Signal sel, Signal when_true, Signal when_false) {
  if (when_true == when_false) return when_true;
  return make_or(make_and(sel, when_true), make_and(make_not(sel), when_false));
}

std::vector<Signal> NetlistBuilder::instantiate(const Netlist& sub, std::span<const Signal> inputs) {
  if (inputs.size() != sub.input_count()) {
    throw ValidationError(fmt::format("instantiating '{}' with {} inputs, expected {}", sub.name(),
                                      inputs.size(), sub.input_count()));
  }
  std::vector<Signal> map(sub.signal_count());
  for (std::size_t i = 0; i < inputs.size(); ++i) map[i] = inputs[i];
  const auto active = sub.active_gates();
  for (std::size_t k = 0; k < sub.gate_count(); ++k) {
    if (!active[k]) continue;
    const Gate& g = sub.gates()[k];
    map[sub.input_count() + k] = add(g.fn, map[g.a], map[g.b]);
  }
  std::vector<Signal> outs;
  outs.reserve(sub.output_count());
  for (Signal s : sub.outputs()) outs.push_back(map[s]);
  return outs;
}

Netlist NetlistBuilder::build(std::string name, std::vector<Signal> outputs) const {
  return Netlist(std::move(name), input_count_, gates_, std::move(outputs)).compacted();
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const Netlist& netlist) {
  nlohmann::json gates = nlohmann::json::array();
  for (const Gate& g : netlist.gates()) {
    gates.push_back({{"fn", to_string(g.fn)}, {"a", g.a}, {"b", g.b}});
  }
  return {{"name", netlist.name()},
          {"inputs", netlist.input_count()},
          {"outputs", netlist.outputs()},
          {"gates", std::move(gates)}};
}

Netlist netlist_from_json(const nlohmann::json& j) {
  try {
    std::vector<Gate> gates;
    for (const auto& g : j.at("gates")) {
      gates.push_back({gate_fn_from_string(g.at("fn").get<std::string>()), g.at("a").get<Signal>(),
                       g.at("b").get<Signal>()});
    }
    return Netlist(j.value("name", std::string{}), j.at("inputs").get<std::size_t>(),
                   std::move(gates), j.at("outputs").get<std::vector<Signal>>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("malformed netlist JSON: {}", e.what()));
  }
}

namespace {

std::string verilog_ident(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || (out[0] >= '0' && out[0] <= '9')) out.insert(out.begin(), 'm');
  return out;
}

std::string signal_name(const Netlist& n, Signal s) {
  return n.is_input(s) ? fmt::format("in{}", s) : fmt::format("n{}", s);
}

}  // namespace

void write_verilog(std::ostream& out, const Netlist& netlist) {
  out << "module " << verilog_ident(netlist.name()) << " (";
  bool first = true;
  for (std::size_t i = 0; i < netlist.input_count(); ++i) {
    out << (first ? "" : ", ") << "in" << i;
    first = false;
  }
  for (std::size_t i = 0; i < netlist.output_count(); ++i) {
    out << (first ? "" : ", ") << "out" << i;
    first = false;
  }
  out << ");\n";
  for (std::size_t i = 0; i < netlist.input_count(); ++i) out << "  input in" << i << ";\n";
  for (std::size_t i = 0; i < netlist.output_count(); ++i) out << "  output out" << i << ";\n";
  for (std::size_t k = 0; k < netlist.gate_count(); ++k) {
    out << "  wire n" << netlist.input_count() + k << ";\n";
  }
  for (std::size_t k = 0; k < netlist.gate_count(); ++k) {
    const Gate& g = netlist.gates()[k];
    const Signal self = static_cast<Signal>(netlist.input_count() + k);
    const std::string y = signal_name(netlist, self);
    switch (g.fn) {
      case GateFn::Const0: out << "  assign " << y << " = 1'b0;\n"; break;
      case GateFn::Const1: out << "  assign " << y << " = 1'b1;\n"; break;
      case GateFn::Buf:
      case GateFn::Not:
        out << fmt::format("  {} g{} ({}, {});\n", g.fn == GateFn::Buf ? "buf" : "not", k, y,
                           signal_name(netlist, g.a));
        break;
      default: {
        std::string prim(to_string(g.fn));
        for (char& c : prim) c = static_cast<char>(c - 'A' + 'a');
        out << fmt::format("  {} g{} ({}, {}, {});\n", prim, k, y, signal_name(netlist, g.a),
                           signal_name(netlist, g.b));
      }
    }
  }
  for (std::size_t i = 0; i < netlist.output_count(); ++i) {
    out << "  assign out" << i << " = " << signal_name(netlist, netlist.outputs()[i]) << ";\n";
  }
  out << "endmodule\n";
}

std::string to_verilog(const Netlist& netlist) {
  std::ostringstream os;
  write_verilog(os, netlist);
  return os.str();
}

}  // namespace forge
