#pragma once

#include <array>
#include <optional>

#include <json.hpp>

#include "forge/netlist.hpp"

namespace forge {

/// Relative per-cell area in technology-neutral units.
class AreaTable {
 public:
  /// Empty table; every lookup fails until entries are set.
  AreaTable() = default;

  /// NOT=1, AND/OR/NAND/NOR=2, XOR/XNOR=3; constants and buffers are free.
  static AreaTable defaults();

  void set(GateFn fn, double cost);
  void erase(GateFn fn) { costs_[static_cast<std::size_t>(fn)].reset(); }
  bool has(GateFn fn) const { return costs_[static_cast<std::size_t>(fn)].has_value(); }
  double cost(GateFn fn) const;

  nlohmann::json to_json() const;
  /// Entries present in `j` override the defaults.
  static AreaTable from_json(const nlohmann::json& j);

 private:
  std::array<std::optional<double>, kGateFnCount> costs_;
};

/// Sum of cell costs over gates in the fan-in cone of the outputs.
double area(const Netlist& netlist, const AreaTable& table = AreaTable::defaults());

}  // namespace forge
