#include "lowmot/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lowmot {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

void CostMatrix::validate() const {
  for (double x : data_) {
    if (std::isnan(x) || (std::isfinite(x) && x < 0.0)) {
      throw std::invalid_argument(
          "CostMatrix: entries must be non-negative or infeasible");
    }
  }
}

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// One multi-source shortest-augmenting-path iteration. Sources are all
// currently unmatched rows; the search stops at the cheapest free column.
// Potentials keep reduced costs non-negative so plain Dijkstra applies.
// Infeasible entries are skipped outright and never enter the arithmetic.
bool augment_once(const CostMatrix& costs, std::vector<std::size_t>& row_match,
                  std::vector<std::size_t>& col_match, std::vector<double>& u,
                  std::vector<double>& v) {
  const std::size_t n = costs.rows();
  const std::size_t m = costs.cols();

  std::vector<double> dist(m, kInfeasible);
  std::vector<double> dist_row(n, kInfeasible);  // distance at tree entry
  std::vector<std::size_t> parent_row(m, kNone);
  std::vector<char> finalized(m, 0);

  for (std::size_t r = 0; r < n; ++r) {
    if (row_match[r] != kNone) continue;
    dist_row[r] = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const double cost = costs(r, c);
      if (!std::isfinite(cost)) continue;
      const double d = cost - u[r] - v[c];
      if (d < dist[c]) {
        dist[c] = d;
        parent_row[c] = r;
      }
    }
  }

  std::size_t free_col = kNone;
  while (true) {
    std::size_t best = kNone;
    for (std::size_t c = 0; c < m; ++c) {
      if (finalized[c] || !std::isfinite(dist[c])) continue;
      if (best == kNone || dist[c] < dist[best]) best = c;
    }
    if (best == kNone) return false;  // no free column reachable
    if (col_match[best] == kNone) {
      free_col = best;
      break;
    }
    finalized[best] = 1;
    const std::size_t r = col_match[best];
    dist_row[r] = dist[best];
    for (std::size_t c = 0; c < m; ++c) {
      if (finalized[c]) continue;
      const double cost = costs(r, c);
      if (!std::isfinite(cost)) continue;
      const double d = dist[best] + cost - u[r] - v[c];
      if (d < dist[c]) {
        dist[c] = d;
        parent_row[c] = r;
      }
    }
  }

  const double path_dist = dist[free_col];
  for (std::size_t r = 0; r < n; ++r) {
    if (std::isfinite(dist_row[r]) && dist_row[r] < path_dist) {
      u[r] += path_dist - dist_row[r];
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    if (finalized[c] && dist[c] < path_dist) {
      v[c] -= path_dist - dist[c];
    }
  }

  std::size_t c = free_col;
  while (c != kNone) {
    const std::size_t r = parent_row[c];
    const std::size_t next = row_match[r];
    row_match[r] = c;
    col_match[c] = r;
    c = next;
  }
  return true;
}

struct OracleBest {
  std::size_t cardinality = 0;
  double cost = kInfeasible;
  std::vector<std::size_t> row_to_col;
  bool has_solution = false;
};

void oracle_search(const CostMatrix& costs, std::size_t row,
                   std::vector<std::size_t>& row_to_col,
                   std::vector<char>& col_used, std::size_t cardinality,
                   double cost, OracleBest& best) {
  const std::size_t rows = costs.rows();
  const std::size_t remaining = rows - row;
  if (cardinality + remaining < best.cardinality) return;
  if (best.has_solution && cardinality + remaining == best.cardinality &&
      cost >= best.cost) {
    return;
  }
  if (row == rows) {
    if (!best.has_solution || cardinality > best.cardinality ||
        (cardinality == best.cardinality && cost < best.cost)) {
      best.has_solution = true;
      best.cardinality = cardinality;
      best.cost = cost;
      best.row_to_col = row_to_col;
    }
    return;
  }
  for (std::size_t c = 0; c < costs.cols(); ++c) {
    if (col_used[c] || !std::isfinite(costs(row, c))) continue;
    col_used[c] = 1;
    row_to_col[row] = c;
    oracle_search(costs, row + 1, row_to_col, col_used, cardinality + 1,
                  cost + costs(row, c), best);
    row_to_col[row] = kNone;
    col_used[c] = 0;
  }
  oracle_search(costs, row + 1, row_to_col, col_used, cardinality, cost, best);
}

CostMatrix transposed(const CostMatrix& costs) {
  CostMatrix t(costs.cols(), costs.rows());
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    for (std::size_t c = 0; c < costs.cols(); ++c) t(c, r) = costs(r, c);
  }
  return t;
}

}  // namespace

Matching solve(const CostMatrix& costs) {
  costs.validate();
  Matching result;
  if (costs.empty()) return result;

  const std::size_t n = costs.rows();
  const std::size_t m = costs.cols();
  std::vector<std::size_t> row_match(n, kNone);
  std::vector<std::size_t> col_match(m, kNone);
  std::vector<double> u(n, 0.0);
  std::vector<double> v(m, 0.0);

  while (augment_once(costs, row_match, col_match, u, v)) {
  }

  for (std::size_t r = 0; r < n; ++r) {
    if (row_match[r] == kNone) continue;
    result.pairs.push_back({r, row_match[r]});
    result.total_cost += costs(r, row_match[r]);
  }
  return result;
}

Matching brute_force_solve(const CostMatrix& costs) {
  costs.validate();
  Matching result;
  if (costs.empty()) return result;
  if (std::min(costs.rows(), costs.cols()) > 8) {
    throw std::invalid_argument("brute_force_solve: dimension over limit 8");
  }

  const bool transpose = costs.cols() < costs.rows();
  const CostMatrix work = transpose ? transposed(costs) : costs;

  OracleBest best;
  std::vector<std::size_t> row_to_col(work.rows(), kNone);
  std::vector<char> col_used(work.cols(), 0);
  oracle_search(work, 0, row_to_col, col_used, 0, 0.0, best);

  for (std::size_t r = 0; r < work.rows(); ++r) {
    if (best.row_to_col[r] == kNone) continue;
    const std::size_t c = best.row_to_col[r];
    if (transpose) {
      result.pairs.push_back({c, r});
    } else {
      result.pairs.push_back({r, c});
    }
    result.total_cost += work(r, c);
  }
  if (transpose) {
    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const MatchPair& a, const MatchPair& b) {
                return a.row < b.row;
              });
  }
  return result;
}

}  // namespace lowmot
