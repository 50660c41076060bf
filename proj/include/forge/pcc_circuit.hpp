#pragma once

#include <cstddef>

#include "forge/netlist.hpp"

namespace forge {

/// Popcount-compare neuron: [popcount(pos) >= popcount(neg)]. The assembled
/// netlist takes the n_pos positive inputs first, then the n_neg negative ones.
struct PccCircuit {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  Netlist pc_pos;
  Netlist pc_neg;
  std::size_t comparator_width = 0;
  Netlist assembled;
};

}  // namespace forge
