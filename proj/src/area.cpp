#include "forge/area.hpp"

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

AreaTable AreaTable::defaults() {
  AreaTable t;
  t.set(GateFn::Const0, 0.0);
  t.set(GateFn::Const1, 0.0);
  t.set(GateFn::Buf, 0.0);
  t.set(GateFn::Not, 1.0);
  t.set(GateFn::And, 2.0);
  t.set(GateFn::Or, 2.0);
  t.set(GateFn::Nand, 2.0);
  t.set(GateFn::Nor, 2.0);
  t.set(GateFn::Xor, 3.0);
  t.set(GateFn::Xnor, 3.0);
  return t;
}

void AreaTable::set(GateFn fn, double cost) {
  if (!(cost >= 0.0)) throw ConfigError(fmt::format("area of {} must be non-negative", to_string(fn)));
  costs_[static_cast<std::size_t>(fn)] = cost;
}

double AreaTable::cost(GateFn fn) const {
  const auto& c = costs_[static_cast<std::size_t>(fn)];
  if (!c) throw ConfigError(fmt::format("area table has no entry for {}", to_string(fn)));
  return *c;
}

nlohmann::json AreaTable::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (GateFn fn : kAllGateFns) {
    if (has(fn)) j[std::string(to_string(fn))] = cost(fn);
  }
  return j;
}

AreaTable AreaTable::from_json(const nlohmann::json& j) {
  AreaTable t = defaults();
  if (!j.is_object()) throw ConfigError("area table must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError(fmt::format("area for {} is not a number", key));
    t.set(gate_fn_from_string(key), value.get<double>());
  }
  return t;
}

double area(const Netlist& netlist, const AreaTable& table) {
  const auto active = netlist.active_gates();
  double total = 0.0;
  for (std::size_t k = 0; k < netlist.gate_count(); ++k) {
    if (active[k]) total += table.cost(netlist.gates()[k].fn);
  }
  return total;
}

}  // namespace forge
