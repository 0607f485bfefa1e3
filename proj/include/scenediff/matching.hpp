#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scenediff {

// Row-major cost matrix for a rows x cols assignment problem.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Minimum-total-cost one-to-one assignment (Hungarian / Kuhn-Munkres with
// potentials, O(n^2 m)). Returns, for each row, the assigned column or -1
// when rows outnumber columns.
std::vector<int> hungarian_assignment(const CostMatrix& cost);

// Repeatedly takes the globally cheapest remaining (row, col); ties break on
// the lower row then the lower column.
std::vector<int> greedy_assignment(const CostMatrix& cost);

double assignment_cost(const CostMatrix& cost, std::span<const int> assignment);

}  // namespace scenediff
