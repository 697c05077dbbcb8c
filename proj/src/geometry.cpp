#include "layered_ot/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "layered_ot/errors.hpp"

namespace layered_ot {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Point sub(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("sub: dimension mismatch");
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Point add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("add: dimension mismatch");
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Point scaled(std::span<const double> a, double s) {
  Point r(a.begin(), a.end());
  for (double& v : r) v *= s;
  return r;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return norm(sub(a, b));
}

Point unit(std::span<const double> a) {
  const double n = norm(a);
  if (n == 0.0) throw UsageError("unit: zero vector");
  return scaled(a, 1.0 / n);
}

double sine_to_line(std::span<const double> v, std::span<const double> dir) {
  const double nv = norm(v);
  if (nv == 0.0) return 0.0;
  const Point d = unit(dir);
  const double proj = dot(v, d);
  double res2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = v[i] - proj * d[i];
    res2 += r * r;
  }
  return std::min(1.0, std::sqrt(res2) / nv);
}

std::vector<Point> orthonormal_complement(std::span<const double> normal) {
  const std::size_t dim = normal.size();
  std::vector<Point> basis;
  basis.push_back(unit(normal));
  for (std::size_t e = 0; e < dim && basis.size() < dim; ++e) {
    Point v(dim, 0.0);
    v[e] = 1.0;
    for (const Point& b : basis) {
      const double p = dot(v, b);
      for (std::size_t i = 0; i < dim; ++i) v[i] -= p * b[i];
    }
    const double nv = norm(v);
    if (nv > 1e-8) basis.push_back(scaled(v, 1.0 / nv));
  }
  basis.erase(basis.begin());
  return basis;
}

std::size_t numerical_rank(std::vector<std::vector<double>> rows, double tol) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    for (std::size_t r = rank + 1; r < rows.size(); ++r)
      if (std::abs(rows[r][c]) > std::abs(rows[piv][c])) piv = r;
    if (std::abs(rows[piv][c]) <= tol) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      const double f = rows[r][c] / rows[rank][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace layered_ot
