#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "layered_ot/geometry.hpp"

namespace layered_ot {

enum class CostFamily {
  /// h(x-y) with h(u) = |u|^p, p > 1.
  power,
  /// h(x-y) with h(u) = sum_i log cosh(u_i).
  log_cosh,
  /// |x-y|^2.
  quadratic,
  /// <x,y> + <x,z> + <y,z>, a surplus to be maximized.
  surplus3,
  /// User-supplied two-point cost with analytic x-gradient.
  custom,
};

using CustomEval = std::function<double(const Point& x, const Point& y)>;
using CustomGrad = std::function<Point(const Point& x, const Point& y)>;

class CostModel {
 public:
  static CostModel power(double p);
  static CostModel quadratic();
  static CostModel log_cosh();
  static CostModel surplus3();
  static CostModel custom(std::string name, CustomEval eval, CustomGrad grad);

  CostFamily family() const { return family_; }
  double p() const { return p_; }
  std::size_t arity() const { return family_ == CostFamily::surplus3 ? 3 : 2; }
  const std::string& name() const { return name_; }

  /// c(x,y); throws UsageError for a three-point family.
  double eval2(std::span<const double> x, std::span<const double> y) const;
  /// c(x,y,z); throws UsageError unless the family is surplus3.
  double eval3(std::span<const double> x, std::span<const double> y,
               std::span<const double> z) const;
  /// ∇_x c(x,y); throws DomainError at u = 0 when 1 < p < 2.
  Point grad2(std::span<const double> x, std::span<const double> y) const;
  Point grad3(std::span<const double> x, std::span<const double> y,
              std::span<const double> z) const;

 private:
  CostFamily family_ = CostFamily::quadratic;
  double p_ = 2.0;
  std::string name_ = "quadratic";
  std::shared_ptr<const CustomEval> eval_;
  std::shared_ptr<const CustomGrad> grad_;
};

/// Parses a family name (`power`, `quadratic`, `log_cosh`, `surplus3`).
CostModel make_cost(const std::string& family, double p);

/// A tuple of 2 or 3 points, first entry is x.
using PointTuple = std::vector<Point>;

/// Throws UsageError when the tuple arity does not match the family.
double eval_cost(const CostModel& model, const PointTuple& tuple);

struct GradientSample {
  PointTuple base;
  Point grad_x;
};

GradientSample grad_x_cost(const CostModel& model, const PointTuple& tuple);

/// Central finite difference of x ↦ c(x, ...) with step h.
Point finite_difference_grad_x(const CostModel& model, const PointTuple& tuple, double h = 1e-6);

/// A closed or open curve sampled at nodes, with unit tangents and normals
/// (in the plane of the curve).
struct ManifoldChart {
  std::vector<Point> nodes;
  std::vector<Point> tangents;
  std::vector<Point> normals;
  bool closed = true;
};

ManifoldChart circle_chart(const Point& center, double radius, int nodes);
ManifoldChart ellipse_chart(const Point& center, double a, double b, int nodes);
/// Open segment from a to b (2D); normals are the left-rotated direction.
ManifoldChart segment_chart(const Point& a, const Point& b, int nodes);

/// H(x) = c(x,y1) - c(x,y2) sampled on a chart.
struct GapProfile {
  std::vector<double> values;
  /// ⟨∇H, tangent⟩ per node.
  std::vector<double> tangential;
  /// |∇H - ⟨∇H,n⟩n| / (|∇H| + 1e-300) per node, the sine test of ∇H ∥ n.
  std::vector<double> residual;
  /// |∇H| per node.
  std::vector<double> grad_norm;
  bool closed = true;
};

/// Throws UsageError when y1 == y2.
GapProfile subtwist_gap(const CostModel& model, const Point& y1, const Point& y2,
                        const ManifoldChart& chart);

}  // namespace layered_ot
