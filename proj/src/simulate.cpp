#include "forge/simulate.hpp"

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

BitMatrix::BitMatrix(std::size_t rows, std::size_t vector_count)
    : rows_(rows), vectors_(vector_count), words_((vector_count + 63) / 64),
      data_(rows * words_, 0) {}

void BitMatrix::set(std::size_t r, std::size_t lane, bool v) {
  std::uint64_t& w = data_[r * words_ + lane / 64];
  const std::uint64_t bit = 1ULL << (lane % 64);
  w = v ? (w | bit) : (w & ~bit);
}

std::uint64_t BitMatrix::lane_mask(std::size_t w) const {
  const std::size_t used = vectors_ - w * 64;
  return used >= 64 ? ~0ULL : ((1ULL << used) - 1);
}

std::uint64_t BitMatrix::column_value(std::size_t lane) const {
  std::uint64_t v = 0;
  for (std::size_t r = 0; r < rows_ && r < 64; ++r) v |= static_cast<std::uint64_t>(get(r, lane)) << r;
  return v;
}

BitMatrix exhaustive_inputs(std::size_t input_count) {
  if (input_count > 30) {
    throw ResourceError(fmt::format("refusing to enumerate 2^{} input vectors", input_count));
  }
  static constexpr std::uint64_t kPatterns[6] = {
      0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
      0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
  BitMatrix m(input_count, std::size_t{1} << input_count);
  for (std::size_t i = 0; i < input_count; ++i) {
    auto row = m.row(i);
    for (std::size_t w = 0; w < row.size(); ++w) {
      row[w] = i < 6 ? kPatterns[i] : (((w >> (i - 6)) & 1U) ? ~0ULL : 0);
    }
  }
  for (std::size_t i = 0; i < input_count; ++i) m.row(i)[m.words_per_row() - 1] &= m.lane_mask(m.words_per_row() - 1);
  return m;
}

BitMatrix simulate(const Netlist& netlist, const BitMatrix& inputs) {
  if (inputs.rows() != netlist.input_count()) {
    throw ValidationError(fmt::format("simulate '{}': got {} input rows, netlist has {} inputs",
                                      netlist.name(), inputs.rows(), netlist.input_count()));
  }
  const std::size_t words = inputs.words_per_row();
  const std::size_t n = netlist.input_count();
  std::vector<std::uint64_t> values(netlist.signal_count() * words);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = inputs.row(i);
    std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(i * words));
  }
  for (std::size_t k = 0; k < netlist.gate_count(); ++k) {
    const Gate& g = netlist.gates()[k];
    std::uint64_t* dst = values.data() + (n + k) * words;
    const std::uint64_t* a = values.data() + static_cast<std::size_t>(g.a) * words;
    const std::uint64_t* b = values.data() + static_cast<std::size_t>(g.b) * words;
    switch (g.fn) {
      case GateFn::Const0: for (std::size_t w = 0; w < words; ++w) dst[w] = 0; break;
      case GateFn::Const1: for (std::size_t w = 0; w < words; ++w) dst[w] = ~0ULL; break;
      case GateFn::Buf: for (std::size_t w = 0; w < words; ++w) dst[w] = a[w]; break;
      case GateFn::Not: for (std::size_t w = 0; w < words; ++w) dst[w] = ~a[w]; break;
      case GateFn::And: for (std::size_t w = 0; w < words; ++w) dst[w] = a[w] & b[w]; break;
      case GateFn::Or: for (std::size_t w = 0; w < words; ++w) dst[w] = a[w] | b[w]; break;
      case GateFn::Xor: for (std::size_t w = 0; w < words; ++w) dst[w] = a[w] ^ b[w]; break;
      case GateFn::Nand: for (std::size_t w = 0; w < words; ++w) dst[w] = ~(a[w] & b[w]); break;
      case GateFn::Nor: for (std::size_t w = 0; w < words; ++w) dst[w] = ~(a[w] | b[w]); break;
      case GateFn::Xnor: for (std::size_t w = 0; w < words; ++w) dst[w] = ~(a[w] ^ b[w]); break;
    }
  }
  BitMatrix out(netlist.output_count(), inputs.vector_count());
  for (std::size_t o = 0; o < netlist.output_count(); ++o) {
    const std::uint64_t* src = values.data() + static_cast<std::size_t>(netlist.outputs()[o]) * words;
    auto dst = out.row(o);
    for (std::size_t w = 0; w < words; ++w) dst[w] = src[w] & out.lane_mask(w);
  }
  return out;
}

}  // namespace forge
