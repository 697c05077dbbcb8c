#pragma once

#include <cstddef>
#include <vector>

namespace layered_ot::detail {

/// Two-phase revised simplex for min c'x, Ax = b, x >= 0 with a 0/1 matrix A
/// given column-wise (row indices of the unit entries) and b >= 0.
/// Keeps an explicit dense B^{-1} with product-form updates and periodic
/// refactorization. Rows found redundant after phase 1 keep a zero
/// artificial in the basis.
class DenseSimplex {
 public:
  DenseSimplex(std::size_t rows, std::vector<std::vector<int>> columns, std::vector<double> rhs,
               std::vector<double> cost);

  /// Throws SolverError when infeasible or at the pivot cap (0 = automatic).
  void solve(std::size_t max_pivots = 0);

  const std::vector<double>& x() const { return x_; }
  /// Row duals y with c_j - y'A_j >= 0 at optimality.
  const std::vector<double>& duals() const { return y_; }
  std::size_t pivots() const { return pivots_; }
  std::size_t redundant_rows() const { return redundant_; }

 private:
  struct Impl;
  std::size_t rows_;
  std::vector<std::vector<int>> cols_;
  std::vector<double> rhs_, cost_;
  std::vector<double> x_, y_;
  std::size_t pivots_ = 0;
  std::size_t redundant_ = 0;
};

}  // namespace layered_ot::detail
