#include "layered_ot/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "layered_ot/errors.hpp"

namespace layered_ot {

double CostMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

double CostTensor::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

namespace kernels {

CostMatrix tabulate_cost(const CostModel& model, const DiscreteMeasure& a, const DiscreteMeasure& b,
                         Exec exec) {
  if (model.arity() != 2) throw UsageError("tabulate_cost needs a two-point cost");
  const long m = static_cast<long>(a.size());
  const std::size_t n = b.size();
  CostMatrix c(a.size(), n);
  if (exec == Exec::serial) {
    for (long i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j) = model.eval2(a.point(i), b.point(j));
    return c;
  }
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) = model.eval2(a.point(i), b.point(j));
  return c;
}

CostTensor tabulate_cost3(const CostModel& model, const DiscreteMeasure& a, const DiscreteMeasure& b,
                          const DiscreteMeasure& c, Exec exec) {
  if (model.arity() != 3) throw UsageError("tabulate_cost3 needs a three-point cost");
  CostTensor t(a.size(), b.size(), c.size());
  const long n1 = static_cast<long>(a.size());
  auto fill_row = [&](long i) {
    for (std::size_t j = 0; j < b.size(); ++j)
      for (std::size_t k = 0; k < c.size(); ++k)
        t(i, j, k) = model.eval3(a.point(i), b.point(j), c.point(k));
  };
  if (exec == Exec::serial) {
    for (long i = 0; i < n1; ++i) fill_row(i);
    return t;
  }
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n1; ++i) fill_row(i);
  return t;
}

ReducedTable reduce_last(const CostTensor& c, const std::vector<double>& phi3, bool maximize,
                         Exec exec) {
  if (phi3.size() != c.n3) throw UsageError("reduce_last: potential size mismatch");
  ReducedTable r{CostMatrix(c.n1, c.n2), std::vector<int>(c.n1 * c.n2, -1)};
  const long cells = static_cast<long>(c.n1 * c.n2);
  auto reduce_cell = [&](long cell) {
    const std::size_t i = cell / c.n2, j = cell % c.n2;
    double best = 0.0;
    int arg = -1;
    for (std::size_t k = 0; k < c.n3; ++k) {
      const double v = c(i, j, k) - phi3[k];
      if (arg < 0 || (maximize ? v > best : v < best)) {
        best = v;
        arg = static_cast<int>(k);
      }
    }
    r.values.data[cell] = best;
    r.witness[cell] = arg;
  };
  if (exec == Exec::serial) {
    for (long cell = 0; cell < cells; ++cell) reduce_cell(cell);
    return r;
  }
#pragma omp parallel for schedule(static)
  for (long cell = 0; cell < cells; ++cell) reduce_cell(cell);
  return r;
}

TwoCycleScan scan_two_cycles(const CostMatrix& c, const std::vector<std::pair<int, int>>& support,
                             bool maximize, double tol, Exec exec) {
  const long s = static_cast<long>(support.size());
  const double sign = maximize ? -1.0 : 1.0;
  auto excess = [&](long p, long q) {
    const auto [i1, j1] = support[p];
    const auto [i2, j2] = support[q];
    return sign * ((c(i1, j1) + c(i2, j2)) - (c(i1, j2) + c(i2, j1)));
  };
  TwoCycleScan out;
  out.checked = static_cast<std::size_t>(s) * static_cast<std::size_t>(s > 0 ? s - 1 : 0) / 2;
  if (exec == Exec::serial) {
    for (long p = 0; p < s; ++p)
      for (long q = p + 1; q < s; ++q) {
        const double e = excess(p, q);
        if (e > tol) ++out.violations;
        out.worst = std::max(out.worst, e);
      }
    return out;
  }
  std::size_t violations = 0;
  double worst = 0.0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : violations) reduction(max : worst)
  for (long p = 0; p < s; ++p)
    for (long q = p + 1; q < s; ++q) {
      const double e = excess(p, q);
      if (e > tol) ++violations;
      worst = std::max(worst, e);
    }
  out.violations = violations;
  out.worst = worst;
  return out;
}

}  // namespace kernels
}  // namespace layered_ot
