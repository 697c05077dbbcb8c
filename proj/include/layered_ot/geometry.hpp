#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace layered_ot {

/// A point or vector of the ambient space R^{n+1}.
using Point = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
Point sub(std::span<const double> a, std::span<const double> b);
Point add(std::span<const double> a, std::span<const double> b);
Point scaled(std::span<const double> a, double s);
double distance(std::span<const double> a, std::span<const double> b);
Point unit(std::span<const double> a);

/// Sine of the angle between `v` and the line spanned by `dir`.
/// Returns 0 for the zero vector.
double sine_to_line(std::span<const double> v, std::span<const double> dir);

/// Orthonormal basis of the orthogonal complement of `normal` (Gram-Schmidt).
std::vector<Point> orthonormal_complement(std::span<const double> normal);

/// Numerical rank of the row set by Gaussian elimination with partial pivoting.
std::size_t numerical_rank(std::vector<std::vector<double>> rows, double tol);

}  // namespace layered_ot
