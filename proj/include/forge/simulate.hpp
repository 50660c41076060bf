#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "forge/netlist.hpp"

namespace forge {

/// Row-major packed bits: each row holds one signal across `vector_count`
/// evaluation lanes, 64 lanes per word. Lanes past vector_count are padding.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t vector_count);

  std::size_t rows() const { return rows_; }
  std::size_t vector_count() const { return vectors_; }
  std::size_t words_per_row() const { return words_; }

  std::span<std::uint64_t> row(std::size_t r) { return {data_.data() + r * words_, words_}; }
  std::span<const std::uint64_t> row(std::size_t r) const { return {data_.data() + r * words_, words_}; }

  bool get(std::size_t r, std::size_t lane) const {
    return (data_[r * words_ + lane / 64] >> (lane % 64)) & 1U;
  }
  void set(std::size_t r, std::size_t lane, bool v);

  /// Mask of valid lanes within word w.
  std::uint64_t lane_mask(std::size_t w) const;

  /// Unsigned value of the LSB-first column at `lane`.
  std::uint64_t column_value(std::size_t lane) const;

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t vectors_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> data_;
};

/// All 2^n input vectors; lane v carries the bits of integer v.
BitMatrix exhaustive_inputs(std::size_t input_count);

/// Bit-parallel evaluation of every gate for every lane.
BitMatrix simulate(const Netlist& netlist, const BitMatrix& inputs);

}  // namespace forge
