#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "layered_ot/errors.hpp"
#include "layered_ot/solver.hpp"
#include "oracles.hpp"

using namespace layered_ot;

namespace {

DiscreteMeasure atom(Point p) { return DiscreteMeasure({std::move(p)}, {1.0}); }

DiscreteMeasure random_measure(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point> pts(n, Point(dim));
  for (auto& p : pts)
    for (double& v : p) v = u(rng);
  return DiscreteMeasure(pts, oracle::random_simplex(rng, n));
}

}  // namespace

TEST(TwoMarginal, SingleAtomCarriesAllMass) {
  const auto sol = solve_two_marginal(atom({0.0, 0.0}), atom({1.0, 2.0}), CostModel::quadratic(),
                                      Sense::minimize);
  ASSERT_EQ(sol.plan.support_size(), 1u);
  EXPECT_DOUBLE_EQ(sol.plan.entries()[0].mass, 1.0);
  EXPECT_NEAR(sol.cert.primal, 5.0, 1e-15);
  EXPECT_NEAR(sol.cert.gap, 0.0, 1e-14);
}

TEST(TwoMarginal, PerpendicularValueIsSeparable) {
  const auto sc = make_counterexample_perpendicular(10);
  const auto sol = solve_two_marginal(sc.source, sc.target, CostModel::quadratic(), Sense::minimize);
  double expect = 0.0;
  for (std::size_t i = 0; i < sc.source.size(); ++i)
    expect += sc.source.weight(i) * sc.source.point(i)[0] * sc.source.point(i)[0];
  for (std::size_t j = 0; j < sc.target.size(); ++j)
    expect += sc.target.weight(j) * sc.target.point(j)[1] * sc.target.point(j)[1];
  EXPECT_NEAR(sol.cert.primal, expect, 1e-13);
  EXPECT_NEAR(expect, 2.0 * (1.0 / 3.0 - 1.0 / 1200.0), 1e-14);
}

TEST(TwoMarginal, AtomicValueMatchesQuadrature) {
  const auto sc = make_counterexample_atomic(100);
  const auto sol = solve_two_marginal(sc.source, sc.target, CostModel::quadratic(), Sense::minimize);
  EXPECT_NEAR(sol.cert.primal, oracle::atomic_midpoint_value(100), 1e-13);
  EXPECT_NEAR(sol.cert.primal, 4.0 / 3.0, 1e-3);
}

TEST(TwoMarginal, AtomicRefinementIsSecondOrder) {
  double prev = 1.0;
  for (int grid : {25, 50, 100, 200}) {
    const auto sc = make_counterexample_atomic(grid);
    const double v =
        solve_two_marginal(sc.source, sc.target, CostModel::quadratic(), Sense::minimize).cert.primal;
    const double err = std::abs(v - 4.0 / 3.0);
    EXPECT_LT(err, prev);
    EXPECT_LE(err, (1.0 / 12.0 + 1e-9) / (grid * static_cast<double>(grid)));
    prev = err;
  }
}

TEST(TwoMarginal, OracleEquivalenceOnRandomSmallInstances) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> size(1, 6);
  for (int inst = 0; inst < 50; ++inst) {
    TwoMarginalProblem p;
    p.a = oracle::random_simplex(rng, size(rng));
    p.b = oracle::random_simplex(rng, size(rng));
    p.cost = oracle::random_costs(rng, p.a.size(), p.b.size());
    const auto sol = solve_two_marginal(p);
    double best = 1e300;
    for_each_vertex(p.a, p.b, [&](const TransportPlan& v) { best = std::min(best, v.objective(p.cost)); });
    EXPECT_NEAR(sol.cert.primal, best, 1e-10) << "instance " << inst;
    EXPECT_TRUE(support_is_acyclic(sol.plan));
    EXPECT_LE(sol.plan.support_size(), p.a.size() + p.b.size() - 1);
    const auto dc = check_duality(p, sol.plan, sol.cert, default_tol_s(p.cost.max_abs()));
    EXPECT_TRUE(dc.ok) << "gap " << dc.gap << " outside " << dc.support_outside_s;
  }
}

TEST(TwoMarginal, MaximizeReportsUpperPotentials) {
  std::mt19937_64 rng(7);
  TwoMarginalProblem p;
  p.a = oracle::random_simplex(rng, 5);
  p.b = oracle::random_simplex(rng, 4);
  p.cost = oracle::random_costs(rng, 5, 4);
  p.sense = Sense::maximize;
  const auto sol = solve_two_marginal(p);
  double best = -1e300;
  for_each_vertex(p.a, p.b, [&](const TransportPlan& v) { best = std::max(best, v.objective(p.cost)); });
  EXPECT_NEAR(sol.cert.primal, best, 1e-12);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_GE(sol.cert.potentials[0][i] + sol.cert.potentials[1][j], p.cost(i, j) - 1e-12);
}

TEST(TwoMarginal, GaugePinsFirstSupportSource) {
  std::mt19937_64 rng(11);
  const auto mu = random_measure(rng, 6, 2), nu = random_measure(rng, 5, 2);
  const auto sol = solve_two_marginal(mu, nu, CostModel::quadratic(), Sense::minimize);
  const int i0 = sol.plan.entries().front().idx[0];
  EXPECT_EQ(sol.cert.potentials[0][i0], 0.0);
  const auto again = solve_two_marginal(mu, nu, CostModel::quadratic(), Sense::minimize);
  EXPECT_EQ(sol.cert.potentials, again.cert.potentials);
}

TEST(TwoMarginal, PivotCapRaisesSolverError) {
  std::mt19937_64 rng(3);
  const auto mu = random_measure(rng, 30, 2), nu = random_measure(rng, 30, 2);
  SolverOptions o;
  o.max_pivots = 1;
  EXPECT_THROW(solve_two_marginal(mu, nu, CostModel::quadratic(), Sense::minimize, o), SolverError);
}

TEST(TwoMarginal, MinimizingSetContainsSupport) {
  std::mt19937_64 rng(5);
  const auto mu = random_measure(rng, 20, 3), nu = random_measure(rng, 25, 3);
  const auto p = make_problem(mu, nu, CostModel::power(3.0), Sense::minimize);
  const auto sol = solve_two_marginal(p);
  const auto S = minimizing_set(p, sol.cert, default_tol_s(p.cost.max_abs()));
  for (const auto& e : sol.plan.entries()) EXPECT_TRUE(S.contains(e.idx[0], e.idx[1]));
  EXPECT_LE(sol.cert.max_dual_violation, 1e-9);
}

TEST(Vertices, TwoByTwoBirkhoff) {
  const auto v = enumerate_vertices_bruteforce({0.5, 0.5}, {0.5, 0.5});
  ASSERT_EQ(v.size(), 2u);
  for (const auto& p : v) EXPECT_EQ(p.support_size(), 2u);
}

TEST(Vertices, CountMatchesSubsetEnumeration) {
  std::mt19937_64 rng(99);
  for (auto [m, n] : {std::pair{3, 2}, {3, 3}, {4, 3}, {4, 4}}) {
    const auto a = oracle::random_simplex(rng, m), b = oracle::random_simplex(rng, n);
    EXPECT_EQ(enumerate_vertices_bruteforce(a, b).size(), oracle::count_vertices_by_subsets(a, b))
        << m << "x" << n;
  }
}

TEST(Vertices, EveryVertexIsFeasibleAndAcyclic) {
  std::mt19937_64 rng(4);
  const auto a = oracle::random_simplex(rng, 4), b = oracle::random_simplex(rng, 5);
  for_each_vertex(a, b, [&](const TransportPlan& v) {
    EXPECT_NO_THROW(v.check_feasible({a, b}, 1e-12));
    EXPECT_TRUE(support_is_acyclic(v));
  });
}

TEST(Vertices, CapacityCap) {
  std::vector<double> seven(7, 1.0 / 7.0);
  EXPECT_THROW(enumerate_vertices_bruteforce(seven, {1.0}), CapacityError);
}

TEST(ThreeMarginal, SingleAtoms) {
  const auto sol = solve_three_marginal(atom({1.0, 0.0, 0.0}), atom({1.0, 0.0, 0.0}),
                                        atom({1.0, 0.0, 0.0}), CostModel::surplus3());
  ASSERT_EQ(sol.plan.support_size(), 1u);
  EXPECT_NEAR(sol.cert.primal, 3.0, 1e-14);
}

TEST(ThreeMarginal, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 3);
  for (int inst = 0; inst < 10; ++inst) {
    const auto mu = random_measure(rng, size(rng), 2);
    const auto nu = random_measure(rng, size(rng), 2);
    const auto ga = random_measure(rng, size(rng), 2);
    const auto p = make_problem(mu, nu, ga, CostModel::surplus3(), Sense::maximize);
    const auto sol = solve_three_marginal(p);
    EXPECT_NEAR(sol.cert.primal, oracle::three_marginal_optimum(p), 1e-10);
    const auto dc = check_duality(p, sol.plan, sol.cert, default_tol_s(p.cost.max_abs()));
    EXPECT_TRUE(dc.ok);
    EXPECT_TRUE(oracle::three_marginal_is_extreme(p, sol.plan));
  }
}

TEST(ThreeMarginal, CapExceeded) {
  std::mt19937_64 rng(1);
  const auto mu = random_measure(rng, 21, 2);
  EXPECT_THROW(solve_three_marginal(mu, mu, mu, CostModel::surplus3()), CapacityError);
}

TEST(ThreeMarginal, DualFeasibleAboveSurplus) {
  std::mt19937_64 rng(8);
  const auto mu = random_measure(rng, 5, 3), nu = random_measure(rng, 4, 3), ga = random_measure(rng, 6, 3);
  const auto p = make_problem(mu, nu, ga, CostModel::surplus3(), Sense::maximize);
  const auto sol = solve_three_marginal(p);
  EXPECT_LE(sol.cert.max_dual_violation, 1e-9);
  EXPECT_LE(sol.cert.gap, 1e-8 * (1.0 + std::abs(sol.cert.primal)));
  EXPECT_NO_THROW(sol.plan.check_feasible({p.a, p.b, p.c}));
}
