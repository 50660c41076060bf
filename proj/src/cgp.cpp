#include "forge/cgp.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

namespace {

struct OperandRange {
  std::size_t inputs;      // [0, inputs)
  std::size_t node_begin;  // absolute address
  std::size_t node_end;
  std::size_t size() const { return inputs + (node_end - node_begin); }
  bool contains(std::size_t addr) const {
    return addr < inputs || (addr >= node_begin && addr < node_end);
  }
  std::uint32_t pick(Rng& rng) const {
    const std::size_t r = uniform_below(rng, size());
    return static_cast<std::uint32_t>(r < inputs ? r : node_begin + (r - inputs));
  }
};

OperandRange operand_range(const CgpGenotype& g, std::size_t node) {
  const std::size_t column = node / g.rows;
  const std::size_t first_column = column > g.levels_back ? column - g.levels_back : 0;
  return {g.input_count, g.input_count + first_column * g.rows, g.input_count + column * g.rows};
}

}  // namespace

void CgpGenotype::validate() const {
  if (input_count == 0) throw ValidationError("genotype needs at least one primary input");
  if (rows == 0 || columns == 0) throw ValidationError("genotype grid is empty");
  if (levels_back == 0) throw ValidationError("genotype levels_back must be >= 1");
  if (genes.size() != 3 * node_count() + output_count) {
    throw ValidationError(fmt::format("genotype has {} genes, expected {}", genes.size(),
                                      3 * node_count() + output_count));
  }
  for (std::size_t k = 0; k < node_count(); ++k) {
    if (genes[3 * k] >= kGateFnCount) {
      throw ValidationError(fmt::format("gene {}: function index {} out of range", 3 * k, genes[3 * k]));
    }
    const OperandRange range = operand_range(*this, k);
    for (std::size_t f = 1; f <= 2; ++f) {
      if (!range.contains(genes[3 * k + f])) {
        throw ValidationError(fmt::format("gene {}: address {} out of range for node {}", 3 * k + f,
                                          genes[3 * k + f], k));
      }
    }
  }
  for (std::size_t o = 0; o < output_count; ++o) {
    if (genes[output_gene(o)] >= address_count()) {
      throw ValidationError(fmt::format("gene {}: output address {} out of range", output_gene(o),
                                        genes[output_gene(o)]));
    }
  }
}

std::size_t default_cgp_columns(const Netlist& seed) {
  return std::max<std::size_t>(100, 4 * seed.gate_count());
}

CgpGenotype encode(const Netlist& netlist, std::size_t columns, std::size_t levels_back) {
  if (netlist.gate_count() > columns) {
    throw CapacityError(fmt::format("netlist '{}' has {} gates but the grid has {} columns; need {}",
                                    netlist.name(), netlist.gate_count(), columns, netlist.gate_count()),
                        netlist.gate_count());
  }
  if (netlist.input_count() == 0) throw ValidationError("cannot encode a netlist without inputs");
  CgpGenotype g;
  g.input_count = netlist.input_count();
  g.output_count = netlist.output_count();
  g.columns = columns;
  g.rows = 1;
  g.levels_back = levels_back;
  g.genes.resize(3 * columns + g.output_count);
  const std::size_t n = netlist.input_count();
  for (std::size_t k = 0; k < columns; ++k) {
    if (k < netlist.gate_count()) {
      const Gate& gate = netlist.gates()[k];
      const int ar = arity(gate.fn);
      // ignored operands still have to be legal addresses
      const std::uint32_t fallback = k == 0 ? 0 : static_cast<std::uint32_t>(n + k - 1);
      g.genes[3 * k] = static_cast<std::uint32_t>(gate.fn);
      g.genes[3 * k + 1] = ar >= 1 ? gate.a : fallback;
      g.genes[3 * k + 2] = ar == 2 ? gate.b : fallback;
    } else {
      const std::uint32_t prev = static_cast<std::uint32_t>(n + k - 1);
      g.genes[3 * k] = static_cast<std::uint32_t>(GateFn::Buf);
      g.genes[3 * k + 1] = prev;
      g.genes[3 * k + 2] = prev;
    }
  }
  for (std::size_t o = 0; o < g.output_count; ++o) g.genes[g.output_gene(o)] = netlist.outputs()[o];
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw CapacityError(fmt::format("netlist '{}' violates levels_back={}: {}", netlist.name(),
                                    levels_back, e.what()),
                        columns);
  }
  return g;
}

Netlist decode(const CgpGenotype& genotype, std::string name) {
  genotype.validate();
  const std::size_t n = genotype.input_count;
  const std::size_t nodes = genotype.node_count();
  std::vector<bool> active(nodes, false);
  for (std::size_t o = 0; o < genotype.output_count; ++o) {
    const std::size_t addr = genotype.genes[genotype.output_gene(o)];
    if (addr >= n) active[addr - n] = true;
  }
  for (std::size_t k = nodes; k-- > 0;) {
    if (!active[k]) continue;
    const int ar = arity(static_cast<GateFn>(genotype.genes[3 * k]));
    for (int f = 1; f <= ar; ++f) {
      const std::size_t addr = genotype.genes[3 * k + f];
      if (addr >= n) active[addr - n] = true;
    }
  }
  std::vector<Signal> remap(genotype.address_count());
  for (std::size_t i = 0; i < n; ++i) remap[i] = static_cast<Signal>(i);
  std::vector<Gate> gates;
  for (std::size_t k = 0; k < nodes; ++k) {
    if (!active[k]) continue;
    const GateFn fn = static_cast<GateFn>(genotype.genes[3 * k]);
    remap[n + k] = static_cast<Signal>(n + gates.size());
    gates.push_back({fn, remap[genotype.genes[3 * k + 1]], remap[genotype.genes[3 * k + 2]]});
  }
  std::vector<Signal> outputs;
  for (std::size_t o = 0; o < genotype.output_count; ++o) {
    outputs.push_back(remap[genotype.genes[genotype.output_gene(o)]]);
  }
  return Netlist(std::move(name), n, std::move(gates), std::move(outputs));
}

CgpGenotype mutate(const CgpGenotype& genotype, std::size_t gene_mutations, Rng& rng) {
  CgpGenotype child = genotype;
  const std::size_t node_genes = 3 * child.node_count();
  for (std::size_t m = 0; m < gene_mutations; ++m) {
    const std::size_t idx = uniform_below(rng, child.genes.size());
    if (idx < node_genes) {
      const std::size_t node = idx / 3;
      if (idx % 3 == 0) {
        child.genes[idx] = static_cast<std::uint32_t>(uniform_below(rng, kGateFnCount));
      } else {
        child.genes[idx] = operand_range(child, node).pick(rng);
      }
    } else {
      child.genes[idx] = static_cast<std::uint32_t>(uniform_below(rng, child.address_count()));
    }
  }
  return child;
}

}  // namespace forge
