#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace forge {

using Objectives = std::array<double, 2>;  // both minimized

constexpr bool dominates(const Objectives& a, const Objectives& b) {
  return a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1]);
}

/// Fast non-dominated sort. fronts[0] holds the indices of rank-0 points,
/// each front in ascending index order.
std::vector<std::vector<std::size_t>> nondominated_fronts(const std::vector<Objectives>& points);

/// Crowding distance of each member of `front`, in front order. Boundary
/// points of either objective get +infinity.
std::vector<double> crowding_distance(const std::vector<Objectives>& points,
                                      const std::vector<std::size_t>& front);

}  // namespace forge
