#include "scenediff/matching.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace scenediff {

namespace {

// Square-or-wide case: rows <= cols. 1-based potentials formulation.
std::vector<int> hungarian_wide(const CostMatrix& cost) {
  const std::size_t n = cost.rows;
  const std::size_t m = cost.cols;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = cost.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) {
      row_to_col[p[j] - 1] = static_cast<int>(j - 1);
    }
  }
  return row_to_col;
}

}  // namespace

std::vector<int> hungarian_assignment(const CostMatrix& cost) {
  if (cost.rows == 0) {
    return {};
  }
  if (cost.cols == 0) {
    return std::vector<int>(cost.rows, -1);
  }
  if (cost.rows <= cost.cols) {
    return hungarian_wide(cost);
  }
  CostMatrix t{cost.cols, cost.rows, std::vector<double>(cost.values.size())};
  for (std::size_t r = 0; r < cost.rows; ++r) {
    for (std::size_t c = 0; c < cost.cols; ++c) {
      t.values[c * t.cols + r] = cost.at(r, c);
    }
  }
  const std::vector<int> col_to_row = hungarian_wide(t);
  std::vector<int> row_to_col(cost.rows, -1);
  for (std::size_t c = 0; c < col_to_row.size(); ++c) {
    if (col_to_row[c] >= 0) {
      row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<int>(c);
    }
  }
  return row_to_col;
}

std::vector<int> greedy_assignment(const CostMatrix& cost) {
  std::vector<std::size_t> order(cost.values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cost.values[a] < cost.values[b];
  });
  std::vector<int> row_to_col(cost.rows, -1);
  std::vector<char> col_used(cost.cols, 0);
  for (const std::size_t idx : order) {
    const std::size_t r = idx / cost.cols;
    const std::size_t c = idx % cost.cols;
    if (row_to_col[r] < 0 && !col_used[c]) {
      row_to_col[r] = static_cast<int>(c);
      col_used[c] = 1;
    }
  }
  return row_to_col;
}

double assignment_cost(const CostMatrix& cost, std::span<const int> assignment) {
  double total = 0.0;
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] >= 0) {
      total += cost.at(r, static_cast<std::size_t>(assignment[r]));
    }
  }
  return total;
}

}  // namespace scenediff
