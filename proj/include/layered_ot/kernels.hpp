#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "layered_ot/costs.hpp"
#include "layered_ot/measures.hpp"

namespace layered_ot {

/// Dense row-major m x n table.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double max_abs() const;
};

/// Dense n1 x n2 x n3 table, last index fastest.
struct CostTensor {
  std::size_t n1 = 0, n2 = 0, n3 = 0;
  std::vector<double> data;

  CostTensor() = default;
  CostTensor(std::size_t a, std::size_t b, std::size_t c, double fill = 0.0)
      : n1(a), n2(b), n3(c), data(a * b * c, fill) {}
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data[(i * n2 + j) * n3 + k]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * n2 + j) * n3 + k];
  }
  double max_abs() const;
};

namespace kernels {

enum class Exec { serial, parallel };

CostMatrix tabulate_cost(const CostModel& model, const DiscreteMeasure& a, const DiscreteMeasure& b,
                         Exec exec = Exec::parallel);

CostTensor tabulate_cost3(const CostModel& model, const DiscreteMeasure& a, const DiscreteMeasure& b,
                          const DiscreteMeasure& c, Exec exec = Exec::parallel);

/// table(i,j) = ext_k [c(i,j,k) - phi3(k)] with ext = max (maximize) or min,
/// plus the smallest k attaining it.
struct ReducedTable {
  CostMatrix values;
  std::vector<int> witness;
};

ReducedTable reduce_last(const CostTensor& c, const std::vector<double>& phi3, bool maximize,
                         Exec exec = Exec::parallel);

/// Exhaustive scan of 2-cycles over support pairs p = (i,j): counts pairs
/// (p,q) with c(i_p,j_p) + c(i_q,j_q) > c(i_p,j_q) + c(i_q,j_p) + tol (min
/// sense; the inequality flips for max sense).
struct TwoCycleScan {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst = 0.0;
};

TwoCycleScan scan_two_cycles(const CostMatrix& c, const std::vector<std::pair<int, int>>& support,
                             bool maximize, double tol, Exec exec = Exec::parallel);

}  // namespace kernels
}  // namespace layered_ot
