#include "layered_ot/uniqueness.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "layered_ot/errors.hpp"

using namespace layered_ot;

namespace {

const CheckResult* find(const std::vector<CheckResult>& v, const std::string& name) {
  for (const auto& c : v)
    if (c.name == name) return &c;
  return nullptr;
}

std::string field(const CheckResult& c, const std::string& key) {
  for (const auto& [k, v] : c.fields)
    if (k == key) return v;
  return "";
}

std::string describe(const TheoremVerdict& v) {
  std::string s;
  for (const CheckResult* c : v.all_checks()) {
    s += c->name + " " + to_string(c->status);
    for (const auto& [k, val] : c->fields) s += " " + k + "=" + val;
    s += "\n";
  }
  return s;
}

LayeredRun t31_run(int K, double p, int grid, std::uint64_t seed) {
  LayeredRun r;
  r.scenario.K = K;
  r.scenario.grid = grid;
  r.scenario.target_grid = grid / 5;
  r.scenario.seed = seed;
  r.scenario.perturb = Perturbation::quantized;
  r.cost = CostModel::power(p);
  r.cycle_samples = 2000;
  return r;
}

}  // namespace

TEST(TheoremIds, RoundTrip) {
  for (TheoremId id : {TheoremId::T3_1, TheoremId::T3_2, TheoremId::T4_1, TheoremId::T5_3,
                       TheoremId::T6_1, TheoremId::C6_2}) {
    EXPECT_EQ(parse_theorem_id(to_string(id)), id);
  }
  EXPECT_EQ(parse_theorem_id("T3_2"), TheoremId::T3_2);
  EXPECT_THROW(parse_theorem_id("T9.9"), ConfigError);
}

TEST(T31, UniqueEvidenceAndTwoGraphs) {
  LayeredRun r = t31_run(2, 2.0, 30, 1);
  r.scenario.target_grid = 6;
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_TRUE(v.ok()) << describe(v);
  EXPECT_TRUE(v.unique_evidence) << describe(v);
  const CheckResult* g = find(v.conclusions, "graph_decomposition");
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(field(*g, "K"), "2");
  EXPECT_EQ(field(*find(v.conclusions, "face_probe"), "dim_lb"), "0");
}

TEST(T31, PowerThreeWithThreeLayers) {
  LayeredRun r = t31_run(3, 3.0, 20, 2);
  r.scenario.t = {0.25, 0.25, 0.5};
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_TRUE(v.ok()) << describe(v);
  EXPECT_TRUE(v.unique_evidence);
}

TEST(T31, AtomicFirstLayerKeepsHypotheses) {
  LayeredRun r = t31_run(2, 2.0, 20, 1);
  r.scenario.atomic_first_layer = true;
  r.scenario.offsets = {2.0, 1.0};
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_TRUE(v.hypotheses_hold()) << describe(v);
}

TEST(T32, TiltedLayersPass) {
  TiltedRun r;
  r.scenario.grid = 20;
  r.scenario.target_grid = 4;
  r.scenario.perturb = Perturbation::quantized;
  r.scenario.source = {{0.0, 0.0}, {0.0, 1.0}};
  r.scenario.layers = {{{0.0, 1.0}, {0.3, 1.0}}, {{0.0, 2.5}, {-0.5, 1.0}}};
  r.cycle_samples = 2000;
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_TRUE(v.ok()) << describe(v);
  EXPECT_TRUE(v.unique_evidence) << describe(v);
}

TEST(T32, PerpendicularLayerSkipsAndFindsFace) {
  TiltedRun r;
  r.expect = Expectation::counterexample;
  r.scenario.grid = 10;
  r.scenario.source = {{0.0, 0.0}, {0.0, 1.0}};
  r.scenario.layers = {{{0.0, 1.0}, {0.0, 1.0}}, {{-1.0, 0.0}, {1.0, 0.0}}};
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_FALSE(v.hypotheses_hold());
  EXPECT_EQ(find(v.hypotheses, "normals_not_perpendicular")->status, CheckStatus::skip);
  for (const auto& c : v.conclusions) EXPECT_EQ(c.status, CheckStatus::skip) << c.name;
  const CheckResult* f = find(v.counterexample, "face_probe");
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->status, CheckStatus::pass) << describe(v);
  EXPECT_TRUE(v.ok()) << describe(v);
}

TEST(T32, UnexpectedHypothesisFailureFails) {
  TiltedRun r;
  r.scenario.grid = 6;
  r.scenario.source = {{0.0, 0.0}, {0.0, 1.0}};
  r.scenario.layers = {{{-1.0, 0.0}, {1.0, 0.0}}};
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_FALSE(v.ok());
  EXPECT_EQ(find(v.hypotheses, "normals_not_perpendicular")->status, CheckStatus::fail);
}

TEST(T41, AtMostFourPartners) {
  ThreeMarginalRun r;
  r.scenario.grid = 12;
  r.scenario.target_grid = 3;
  r.scenario.perturb = Perturbation::quantized;
  r.scenario.jitter = 0.5;
  r.scenario.seed = 7;
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_TRUE(v.ok()) << describe(v);
  const CheckResult* c = find(v.conclusions, "layer_cells");
  ASSERT_NE(c, nullptr);
  EXPECT_LE(std::stoi(field(*c, "max_partners")), 4);
  EXPECT_EQ(find(v.conclusions, "extreme_chain")->status, CheckStatus::skip);
}

TEST(T41, SmallInstanceRunsExtremeChain) {
  ThreeMarginalRun r;
  r.scenario.grid = 4;
  r.scenario.target_grid = 2;
  r.scenario.K = 2;
  r.scenario.L = 2;
  r.scenario.jitter = 0.5;
  r.scenario.perturb = Perturbation::continuous;
  r.scenario.seed = 3;
  const TheoremVerdict v = run_theorem_scenario(r);
  const CheckResult* c = find(v.conclusions, "extreme_chain");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->status, CheckStatus::pass) << describe(v);
}

TEST(T53, MixedSourceRandomTargets) {
  SubtwistRun r;
  r.mixed.boundary_nodes = 24;
  r.mixed.jitter = 0.5;
  r.grid = 12;
  r.targets = 30;
  r.pair_samples = 50;
  r.cycle_samples = 2000;
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_TRUE(v.ok()) << describe(v);
  EXPECT_EQ(field(*find(v.hypotheses, "subtwist"), "max_critical"), "2");
}

TEST(C62, DiskFan) {
  BoundaryRun r;
  r.mixed.boundary_nodes = 32;
  r.mixed.jitter = 0.5;
  r.grid = 24;
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_TRUE(v.ok()) << describe(v);
  EXPECT_TRUE(v.unique_evidence);
}

TEST(T61, EllipseWithoutFaceProbe) {
  BoundaryRun r;
  r.theorem = TheoremId::T6_1;
  r.shape = Shape::ellipsoid({1.3, 0.8});
  r.mixed.boundary_nodes = 24;
  r.mixed.jitter = 0.5;
  r.grid = 16;
  const TheoremVerdict v = run_theorem_scenario(r);
  EXPECT_TRUE(v.ok()) << describe(v);
  EXPECT_EQ(find(v.conclusions, "face_probe"), nullptr);
}

TEST(BoundaryRun, RejectsOtherTheorem) {
  BoundaryRun r;
  r.theorem = TheoremId::T3_1;
  EXPECT_THROW(run_theorem_scenario(r), ConfigError);
}

TEST(Counterexample, AtomicPlans) {
  const auto a = reproduce_atomic_counterexample(100);
  EXPECT_TRUE(a.t1_feasible && a.t2_feasible);
  EXPECT_NEAR(a.cost_t1, a.optimum, 1e-10);
  EXPECT_NEAR(a.cost_t2, a.optimum, 1e-10);
  EXPECT_LE(std::abs(a.cost_t1 - a.cost_t2), 1e-12);
  EXPECT_NEAR(a.optimum, 4.0 / 3.0, 1e-3);
  for (double m : {a.t1_upper, a.t1_lower, a.t2_upper, a.t2_lower}) EXPECT_NEAR(m, 0.5, 1e-12);
  EXPECT_GT(a.plan_difference, 0.0);
  EXPECT_GE(a.probe.face_dimension_lb, 1);
}

TEST(Counterexample, AtomicQuarterRuleAtCellCentres) {
  // Grid 8: centres 1/16, 3/16 | 5/16, 7/16 | ... alternate in pairs.
  const auto [t1, t2] = atomic_counterexample_plans(make_counterexample_atomic(8));
  const int expect1[8] = {0, 0, 1, 1, 0, 0, 1, 1};
  for (int i = 0; i < 8; ++i) {
    EXPECT_GT(t1.mass(i, expect1[i]), 0.0) << i;
    EXPECT_GT(t2.mass(i, 1 - expect1[i]), 0.0) << i;
  }
}

TEST(Counterexample, PerpendicularSpread) {
  const auto q = reproduce_perpendicular_counterexample(10, 100, 1);
  EXPECT_LE(q.spread(), 1e-12);
  EXPECT_LE(q.max_separable_error, 1e-12);
  EXPECT_GT(q.distinct_plans, 1u);
  EXPECT_GE(q.probe.face_dimension_lb, 1);
  EXPECT_TRUE(q.probe.witnesses_optimal);
}

TEST(Counterexample, ByNameAndVerdicts) {
  EXPECT_TRUE(reproduce_counterexample("atomic").ok());
  EXPECT_TRUE(reproduce_counterexample("perpendicular").ok());
  EXPECT_THROW(reproduce_counterexample("other"), ConfigError);
  CounterexampleRun run;
  const TheoremVerdict v = run_theorem_scenario(run);
  EXPECT_TRUE(v.ok()) << describe(v);
  EXPECT_EQ(find(v.hypotheses, "target_layers_nonatomic")->status, CheckStatus::skip);
  EXPECT_EQ(field(*find(v.counterexample, "face_probe"), "dim_lb>=1"), "");
  run.kind = CounterexampleKind::perpendicular;
  EXPECT_TRUE(run_theorem_scenario(run).ok());
}

TEST(Verdict, SeedAgreementRecorded) {
  const TheoremVerdict v = run_theorem_scenario(t31_run(2, 2.0, 20, 4));
  const CheckResult* s = find(v.conclusions, "seed_agreement");
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->status, CheckStatus::pass);
  EXPECT_EQ(field(*s, "dims"), "0,0,0");
}
