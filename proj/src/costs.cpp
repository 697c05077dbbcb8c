#include "layered_ot/costs.hpp"

#include <cmath>
#include <numbers>

#include "layered_ot/errors.hpp"

namespace layered_ot {

namespace {

void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("cost: dimension mismatch");
}

// log cosh without overflow for large |u|.
double log_cosh_scalar(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

CostModel CostModel::power(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw UsageError("power cost requires p > 1");
  CostModel m;
  m.family_ = CostFamily::power;
  m.p_ = p;
  m.name_ = "power";
  return m;
}

CostModel CostModel::quadratic() { return CostModel{}; }

CostModel CostModel::log_cosh() {
  CostModel m;
  m.family_ = CostFamily::log_cosh;
  m.name_ = "log_cosh";
  return m;
}

CostModel CostModel::surplus3() {
  CostModel m;
  m.family_ = CostFamily::surplus3;
  m.name_ = "surplus3";
  return m;
}

CostModel CostModel::custom(std::string name, CustomEval eval, CustomGrad grad) {
  if (!eval || !grad) throw UsageError("custom cost needs both eval and grad");
  CostModel m;
  m.family_ = CostFamily::custom;
  m.name_ = std::move(name);
  m.eval_ = std::make_shared<const CustomEval>(std::move(eval));
  m.grad_ = std::make_shared<const CustomGrad>(std::move(grad));
  return m;
}

CostModel make_cost(const std::string& family, double p) {
  if (family == "quadratic") return CostModel::quadratic();
  if (family == "power") return CostModel::power(p);
  if (family == "log_cosh") return CostModel::log_cosh();
  if (family == "surplus3") return CostModel::surplus3();
  throw UsageError("unknown cost family '" + family + "'");
}

double CostModel::eval2(std::span<const double> x, std::span<const double> y) const {
  require_same_dim(x, y);
  switch (family_) {
    case CostFamily::quadratic: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
      return s;
    }
    case CostFamily::power: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
      return std::pow(s, 0.5 * p_);
    }
    case CostFamily::log_cosh: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += log_cosh_scalar(x[i] - y[i]);
      return s;
    }
    case CostFamily::custom:
      return (*eval_)(Point(x.begin(), x.end()), Point(y.begin(), y.end()));
    case CostFamily::surplus3:
      break;
  }
  throw UsageError("cost arity mismatch: surplus3 takes three points");
}

double CostModel::eval3(std::span<const double> x, std::span<const double> y,
                        std::span<const double> z) const {
  if (family_ != CostFamily::surplus3) throw UsageError("cost arity mismatch: family takes two points");
  require_same_dim(x, y);
  require_same_dim(x, z);
  return dot(x, y) + dot(x, z) + dot(y, z);
}

Point CostModel::grad2(std::span<const double> x, std::span<const double> y) const {
  require_same_dim(x, y);
  Point g(x.size());
  switch (family_) {
    case CostFamily::quadratic:
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * (x[i] - y[i]);
      return g;
    case CostFamily::power: {
      double r2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
      if (r2 == 0.0) {
        if (p_ < 2.0) throw DomainError("|u|^p with p < 2 is not differentiable at u = 0");
        return g;
      }
      const double f = p_ * std::pow(r2, 0.5 * p_ - 1.0);
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = f * (x[i] - y[i]);
      return g;
    }
    case CostFamily::log_cosh:
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = std::tanh(x[i] - y[i]);
      return g;
    case CostFamily::custom:
      g = (*grad_)(Point(x.begin(), x.end()), Point(y.begin(), y.end()));
      if (g.size() != x.size()) throw UsageError("custom gradient has wrong dimension");
      return g;
    case CostFamily::surplus3:
      break;
  }
  throw UsageError("cost arity mismatch: surplus3 takes three points");
}

Point CostModel::grad3(std::span<const double> x, std::span<const double> y,
                       std::span<const double> z) const {
  if (family_ != CostFamily::surplus3) throw UsageError("cost arity mismatch: family takes two points");
  require_same_dim(x, y);
  require_same_dim(x, z);
  return add(y, z);
}

double eval_cost(const CostModel& model, const PointTuple& t) {
  if (t.size() != model.arity()) throw UsageError("cost arity mismatch");
  return t.size() == 2 ? model.eval2(t[0], t[1]) : model.eval3(t[0], t[1], t[2]);
}

GradientSample grad_x_cost(const CostModel& model, const PointTuple& t) {
  if (t.size() != model.arity()) throw UsageError("cost arity mismatch");
  GradientSample s;
  s.base = t;
  s.grad_x = t.size() == 2 ? model.grad2(t[0], t[1]) : model.grad3(t[0], t[1], t[2]);
  for (double v : s.grad_x)
    if (!std::isfinite(v)) throw DomainError("non-finite gradient");
  return s;
}

Point finite_difference_grad_x(const CostModel& model, const PointTuple& tuple, double h) {
  PointTuple t = tuple;
  Point g(t[0].size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x0 = t[0][i];
    t[0][i] = x0 + h;
    const double fp = eval_cost(model, t);
    t[0][i] = x0 - h;
    const double fm = eval_cost(model, t);
    t[0][i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

ManifoldChart ellipse_chart(const Point& center, double a, double b, int nodes) {
  if (center.size() != 2 || nodes < 3 || !(a > 0.0) || !(b > 0.0))
    throw UsageError("ellipse chart needs a 2D centre, positive axes and >= 3 nodes");
  ManifoldChart c;
  c.closed = true;
  for (int k = 0; k < nodes; ++k) {
    const double th = 2.0 * std::numbers::pi * k / nodes;
    c.nodes.push_back({center[0] + a * std::cos(th), center[1] + b * std::sin(th)});
    c.tangents.push_back(unit(Point{-a * std::sin(th), b * std::cos(th)}));
    c.normals.push_back(unit(Point{std::cos(th) / a, std::sin(th) / b}));
  }
  return c;
}

ManifoldChart circle_chart(const Point& center, double radius, int nodes) {
  return ellipse_chart(center, radius, radius, nodes);
}

ManifoldChart segment_chart(const Point& a, const Point& b, int nodes) {
  if (a.size() != 2 || b.size() != 2 || nodes < 2) throw UsageError("segment chart needs 2D endpoints");
  ManifoldChart c;
  c.closed = false;
  const Point dir = unit(sub(b, a));
  const Point nrm{-dir[1], dir[0]};
  for (int k = 0; k < nodes; ++k) {
    const double s = static_cast<double>(k) / (nodes - 1);
    c.nodes.push_back({a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])});
    c.tangents.push_back(dir);
    c.normals.push_back(nrm);
  }
  return c;
}

GapProfile subtwist_gap(const CostModel& model, const Point& y1, const Point& y2,
                        const ManifoldChart& chart) {
  if (distance(y1, y2) <= 1e-12) throw UsageError("subtwist_gap: targets coincide");
  if (model.arity() != 2) throw UsageError("subtwist_gap needs a two-point cost");
  GapProfile g;
  g.closed = chart.closed;
  for (std::size_t k = 0; k < chart.nodes.size(); ++k) {
    const Point& x = chart.nodes[k];
    g.values.push_back(model.eval2(x, y1) - model.eval2(x, y2));
    const Point dh = sub(model.grad2(x, y1), model.grad2(x, y2));
    g.tangential.push_back(dot(dh, chart.tangents[k]));
    g.grad_norm.push_back(norm(dh));
    g.residual.push_back(sine_to_line(dh, chart.normals[k]));
  }
  return g;
}

}  // namespace layered_ot
