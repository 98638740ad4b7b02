#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace lowmot {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

// Rectangular cost matrix; kInfeasible marks forbidden pairs. Finite
// entries must be non-negative.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = kInfeasible);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  // Throws if any finite entry is negative.
  void validate() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MatchPair {
  std::size_t row;
  std::size_t col;
};

struct Matching {
  std::vector<MatchPair> pairs;  // disjoint in rows and in cols
  double total_cost = 0.0;
};

// Exact minimum-cost assignment via shortest augmenting paths: among the
// matchings of maximum cardinality over the feasible pairs, returns one of
// minimum total cost. Rows or columns whose entries are all infeasible
// stay unmatched. Deterministic for identical inputs.
Matching solve(const CostMatrix& costs);

// Exhaustive oracle with the same optimality contract as solve().
// Requires min(rows, cols) <= 8.
Matching brute_force_solve(const CostMatrix& costs);

}  // namespace lowmot
