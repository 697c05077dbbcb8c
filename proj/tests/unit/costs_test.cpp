#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "layered_ot/costs.hpp"
#include "layered_ot/errors.hpp"

using namespace layered_ot;

namespace {

Point random_point(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Point p(dim);
  for (double& v : p) v = u(rng);
  return p;
}

double rel_err(const Point& a, const Point& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / std::max(den, 1.0);
}

int count_critical(const GapProfile& g) {
  // Sign changes of the tangential derivative around the chart.
  const std::size_t n = g.tangential.size();
  int count = 0;
  for (std::size_t i = 0; i + (g.closed ? 0 : 1) < n; ++i) {
    const double a = g.tangential[i], b = g.tangential[(i + 1) % n];
    if ((a > 0.0) != (b > 0.0)) ++count;
  }
  return count;
}

}  // namespace

TEST(Costs, SpecExamples) {
  EXPECT_DOUBLE_EQ(eval_cost(CostModel::quadratic(), {{0, 0}, {1, 1}}), 2.0);
  EXPECT_DOUBLE_EQ(eval_cost(CostModel::surplus3(), {{1, 0}, {1, 0}, {1, 0}}), 3.0);
  EXPECT_DOUBLE_EQ(eval_cost(CostModel::power(3.0), {{0, 0}, {0, 2}}), 8.0);
  EXPECT_EQ(grad_x_cost(CostModel::quadratic(), {{1, 0}, {0, 0}}).grad_x, (Point{2, 0}));
  const auto g = grad_x_cost(CostModel::power(3.0), {{0, 2}, {0, 0}}).grad_x;
  EXPECT_NEAR(g[0], 0.0, 1e-15);
  EXPECT_NEAR(g[1], 12.0, 1e-12);
  const auto fd = finite_difference_grad_x(CostModel::power(3.0), {{0, 2}, {0, 0}});
  EXPECT_NEAR(fd[1], 12.0, 1e-6);
}

TEST(Costs, Surplus3GradientIsSumOfPartners) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Point x = random_point(rng, 3), y = random_point(rng, 3), z = random_point(rng, 3);
    const auto g = grad_x_cost(CostModel::surplus3(), {x, y, z}).grad_x;
    const auto e = add(y, z);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(g[i], e[i]);
  }
}

TEST(Costs, ArityAndDomainErrors) {
  EXPECT_THROW(eval_cost(CostModel::quadratic(), {{0, 0}, {1, 1}, {2, 2}}), UsageError);
  EXPECT_THROW(eval_cost(CostModel::surplus3(), {{0, 0}, {1, 1}}), UsageError);
  EXPECT_THROW(grad_x_cost(CostModel::power(1.5), {{1, 1}, {1, 1}}), DomainError);
  EXPECT_NO_THROW(grad_x_cost(CostModel::power(2.5), {{1, 1}, {1, 1}}));
  EXPECT_THROW(CostModel::power(1.0), UsageError);
  EXPECT_THROW(make_cost("concave", 2.0), UsageError);
  EXPECT_EQ(make_cost("power", 3.0).p(), 3.0);
  EXPECT_EQ(make_cost("surplus3", 0.0).arity(), 3u);
}

// 100 seeded tuples per family, central differences at 1e-6, 1e-5 relative.
TEST(Costs, GradientsMatchFiniteDifferences) {
  const std::array models{CostModel::quadratic(), CostModel::power(1.5), CostModel::power(2.0),
                          CostModel::power(3.0),  CostModel::log_cosh(), CostModel::surplus3()};
  std::mt19937_64 rng(2024);
  for (const auto& m : models) {
    for (int t = 0; t < 100; ++t) {
      PointTuple tuple;
      for (std::size_t a = 0; a < m.arity(); ++a) tuple.push_back(random_point(rng, 3));
      const auto g = grad_x_cost(m, tuple).grad_x;
      const auto fd = finite_difference_grad_x(m, tuple, 1e-6);
      EXPECT_LT(rel_err(g, fd), 1e-5) << m.name() << " tuple " << t;
    }
  }
}

TEST(Costs, CustomFamilyUsesSuppliedGradient) {
  const auto m = CostModel::custom(
      "inner", [](const Point& x, const Point& y) { return dot(x, y); },
      [](const Point&, const Point& y) { return y; });
  EXPECT_EQ(m.family(), CostFamily::custom);
  EXPECT_DOUBLE_EQ(eval_cost(m, {{1, 2}, {3, 4}}), 11.0);
  EXPECT_EQ(grad_x_cost(m, {{1, 2}, {3, 4}}).grad_x, (Point{3, 4}));
}

// <∇h(u) - ∇h(v), u - v> > 0 for u != v.
TEST(Costs, StrictConvexityMonotonicity) {
  const std::array models{CostModel::power(1.5), CostModel::power(2.0), CostModel::power(4.0),
                          CostModel::log_cosh()};
  std::mt19937_64 rng(31);
  const Point zero{0.0, 0.0};
  for (const auto& m : models)
    for (int t = 0; t < 100; ++t) {
      const Point u = random_point(rng, 2), v = random_point(rng, 2);
      const auto gu = m.grad2(u, zero), gv = m.grad2(v, zero);
      EXPECT_GT(dot(sub(gu, gv), sub(u, v)), 0.0) << m.name();
    }
}

TEST(Costs, Surplus3IsSymmetric) {
  std::mt19937_64 rng(77);
  const auto m = CostModel::surplus3();
  for (int t = 0; t < 100; ++t) {
    std::array<Point, 3> p{random_point(rng, 2), random_point(rng, 2), random_point(rng, 2)};
    const double base = m.eval3(p[0], p[1], p[2]);
    std::array<int, 3> idx{0, 1, 2};
    while (std::next_permutation(idx.begin(), idx.end()))
      EXPECT_NEAR(m.eval3(p[idx[0]], p[idx[1]], p[idx[2]]), base, 1e-12);
  }
}

TEST(Subtwist, CircleGapHasTwoCriticalPoints) {
  const auto chart = circle_chart({0.0, 0.0}, 1.0, 360);
  const auto g = subtwist_gap(CostModel::quadratic(), {2.0, 0.0}, {-2.0, 0.0}, chart);
  ASSERT_EQ(g.values.size(), 360u);
  for (std::size_t i = 0; i < chart.nodes.size(); ++i)
    EXPECT_NEAR(g.values[i], -8.0 * chart.nodes[i][0], 1e-12);
  EXPECT_EQ(count_critical(g), 2);
  // ∇H ∥ n at (±1, 0).
  EXPECT_LT(g.residual[0], 1e-10);
  EXPECT_LT(g.residual[180], 1e-10);
}

TEST(Subtwist, CoincidentTargetsRejected) {
  EXPECT_THROW(subtwist_gap(CostModel::quadratic(), {1.0, 0.0}, {1.0, 0.0}, circle_chart({0, 0}, 1.0, 8)),
               UsageError);
}

TEST(Subtwist, LinearCostOnSegmentHasNoInteriorCriticalPoint) {
  const auto inner = CostModel::custom(
      "inner", [](const Point& x, const Point& y) { return dot(x, y); },
      [](const Point&, const Point& y) { return y; });
  const auto chart = segment_chart({0.0, 0.0}, {1.0, 0.5}, 50);
  const auto g = subtwist_gap(inner, {1.0, 2.0}, {-1.0, 0.5}, chart);
  EXPECT_EQ(count_critical(g), 0);
  for (std::size_t i = 1; i < g.tangential.size(); ++i) EXPECT_NEAR(g.tangential[i], g.tangential[0], 1e-12);
}
