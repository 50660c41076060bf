#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "forge/netlist.hpp"
#include "forge/random.hpp"

namespace forge {

/// Cartesian GP genotype. Node k occupies genes [3k, 3k+3) as
/// (function, operand a, operand b); the trailing output_count genes name the
/// output signals. Addresses follow the netlist scheme: inputs first, then
/// nodes column by column.
struct CgpGenotype {
  std::size_t input_count = 0;
  std::size_t output_count = 0;
  std::size_t columns = 0;
  std::size_t rows = 1;
  std::size_t levels_back = 0;
  std::vector<std::uint32_t> genes;

  std::size_t node_count() const { return columns * rows; }
  std::size_t address_count() const { return input_count + node_count(); }
  std::size_t output_gene(std::size_t o) const { return 3 * node_count() + o; }

  /// Throws ValidationError naming the first offending gene.
  void validate() const;

  friend bool operator==(const CgpGenotype&, const CgpGenotype&) = default;
};

/// max(100, 4 * gate count): the default grid width for a seed circuit.
std::size_t default_cgp_columns(const Netlist& seed);

/// Places the netlist's gates on the first nodes of a single-row grid; the
/// remaining nodes are inactive buffers. Throws CapacityError when the gates
/// do not fit.
CgpGenotype encode(const Netlist& netlist, std::size_t columns, std::size_t levels_back);

/// Netlist of the active nodes only, in address order.
Netlist decode(const CgpGenotype& genotype, std::string name = "cgp");

/// Replaces `gene_mutations` uniformly chosen genes with uniformly chosen
/// legal values.
CgpGenotype mutate(const CgpGenotype& genotype, std::size_t gene_mutations, Rng& rng);

}  // namespace forge
