#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "layered_ot/costs.hpp"
#include "layered_ot/measures.hpp"
#include "layered_ot/solver.hpp"

namespace layered_ot {

enum class TheoremId { T3_1, T3_2, T4_1, T5_3, T6_1, C6_2 };

/// "T3.1", ..., "C6.2".
std::string to_string(TheoremId id);
/// Accepts the dotted and the underscore spelling; throws ConfigError.
TheoremId parse_theorem_id(const std::string& s);

enum class CheckStatus { pass, fail, skip };

std::string to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::skip;
  /// Ordered key/value pairs, printed as key=value.
  std::vector<std::pair<std::string, std::string>> fields;

  bool passed() const { return status == CheckStatus::pass; }
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::size_t value);
  void add(const std::string& key, int value);
  void add(const std::string& key, bool value);
};

/// Whether a run is meant to satisfy the theorem's hypotheses or to break
/// them on purpose.
enum class Expectation { hypotheses_hold, counterexample };

struct ProbeSettings {
  int trials = 20;
  std::uint64_t seed = 1;
  double tol_face = 1e-9;
  double tol_plan = 1e-7;
  /// Extra probe seeds used by the seed agreement check.
  int agreement_seeds = 2;
  bool parallel = true;
};

struct LayeredRun {
  TheoremId theorem = TheoremId::T3_1;
  Expectation expect = Expectation::hypotheses_hold;
  LayeredScenarioParams scenario;
  CostModel cost = CostModel::power(2.0);
  ProbeSettings probe;
  std::size_t twist_samples = 100;
  std::size_t cycle_samples = 10000;
};

struct TiltedRun {
  TheoremId theorem = TheoremId::T3_2;
  Expectation expect = Expectation::hypotheses_hold;
  TiltedScenarioParams scenario;
  CostModel cost = CostModel::quadratic();
  ProbeSettings probe;
  std::size_t twist_samples = 100;
  std::size_t cycle_samples = 10000;
};

struct ThreeMarginalRun {
  TheoremId theorem = TheoremId::T4_1;
  Expectation expect = Expectation::hypotheses_hold;
  ThreeMarginalScenarioParams scenario;
  CostModel cost = CostModel::surplus3();
  ProbeSettings probe;
  std::size_t twist_samples = 100;
};

/// Mixed source (interior cells plus boundary nodes) against seeded random
/// targets in [-box, box]^d.
struct SubtwistRun {
  TheoremId theorem = TheoremId::T5_3;
  Expectation expect = Expectation::hypotheses_hold;
  MixedMeasureSpec mixed;
  Shape shape;
  int grid = 16;
  int targets = 40;
  double box = 2.0;
  std::uint64_t seed = 1;
  CostModel cost = CostModel::quadratic();
  /// Nodes of the boundary chart used for the sub-twist hypothesis.
  int chart_nodes = 360;
  std::size_t pair_samples = 200;
  ProbeSettings probe;
  std::size_t cycle_samples = 10000;
};

/// Mixed source against radial fan targets. C6_2 adds strict convexity to
/// the hypotheses and the face probe to the conclusions.
struct BoundaryRun {
  TheoremId theorem = TheoremId::C6_2;
  Expectation expect = Expectation::hypotheses_hold;
  MixedMeasureSpec mixed;
  Shape shape;
  int grid = 24;
  RadialFanSpec fan;
  CostModel cost = CostModel::quadratic();
  ProbeSettings probe;
  double tol_normal = 1e-6;
  double min_interior_single = 0.95;
};

enum class CounterexampleKind { atomic, perpendicular };

std::string to_string(CounterexampleKind k);
CounterexampleKind parse_counterexample(const std::string& s);

struct CounterexampleRun {
  CounterexampleKind kind = CounterexampleKind::atomic;
  /// 0 selects 100 (atomic) or 10 (perpendicular).
  int grid = 0;
  /// Random vertices evaluated by the perpendicular case.
  std::size_t plans = 100;
  ProbeSettings probe;
};

using ScenarioSpec =
    std::variant<LayeredRun, TiltedRun, ThreeMarginalRun, SubtwistRun, BoundaryRun, CounterexampleRun>;

/// Measures, plan and certificate of the solved instance, kept for dumps.
struct RunArtifacts {
  /// Marginals in order (two or three).
  std::vector<DiscreteMeasure> measures;
  TransportPlan plan;
  DualCertificate cert;
  /// Files written for this run, filled by the report writer.
  std::vector<std::string> paths;
};

struct TheoremVerdict {
  TheoremId id = TheoremId::T3_1;
  std::string scenario;
  Expectation expect = Expectation::hypotheses_hold;
  /// PASS when the hypothesis outcome matches `expect`; field holds=0|1.
  std::vector<CheckResult> hypotheses;
  /// Solver-level checks (feasibility, duality), evaluated on every run.
  std::vector<CheckResult> solver;
  /// Theorem conclusions; SKIP unless every hypothesis holds.
  std::vector<CheckResult> conclusions;
  /// Non-uniqueness checks, evaluated when some hypothesis fails.
  std::vector<CheckResult> counterexample;
  /// Face probe dim 0, no extremality violations, graphs decomposed.
  bool unique_evidence = false;
  RunArtifacts artifacts;

  bool hypotheses_hold() const;
  /// Section order: hypotheses, solver, conclusions, counterexample.
  std::vector<const CheckResult*> all_checks() const;
  /// Every non-skipped check passed.
  bool ok() const;
};

TheoremVerdict run_theorem_scenario(const ScenarioSpec& spec);
TheoremVerdict run_theorem_scenario(const LayeredRun& run);
TheoremVerdict run_theorem_scenario(const TiltedRun& run);
TheoremVerdict run_theorem_scenario(const ThreeMarginalRun& run);
TheoremVerdict run_theorem_scenario(const SubtwistRun& run);
TheoremVerdict run_theorem_scenario(const BoundaryRun& run);
TheoremVerdict run_theorem_scenario(const CounterexampleRun& run);

struct AtomicCounterexampleReport {
  int grid = 0;
  double optimum = 0.0;
  double cost_t1 = 0.0;
  double cost_t2 = 0.0;
  /// Mass sent to (1,1) and (1,-1) by each plan.
  double t1_upper = 0.0, t1_lower = 0.0, t2_upper = 0.0, t2_lower = 0.0;
  bool t1_feasible = false;
  bool t2_feasible = false;
  /// Largest entrywise difference between the two plans.
  double plan_difference = 0.0;
  FaceProbe probe;
  TransportPlan t1, t2;
};

struct PerpendicularCounterexampleReport {
  int grid = 0;
  std::size_t plans = 0;
  double min_objective = 0.0;
  double max_objective = 0.0;
  /// sum_i w_i x_{1,i}^2 + sum_j v_j y_{2,j}^2.
  double separable_value = 0.0;
  double max_separable_error = 0.0;
  std::size_t distinct_plans = 0;
  FaceProbe probe;

  double spread() const { return max_objective - min_objective; }
};

/// Plans induced by the quarter-interval maps T1 and T2, cell centres
/// assigned by half-open intervals.
std::pair<TransportPlan, TransportPlan> atomic_counterexample_plans(const LayeredScenario& sc);

AtomicCounterexampleReport reproduce_atomic_counterexample(int grid = 100,
                                                           const ProbeSettings& probe = {});
PerpendicularCounterexampleReport reproduce_perpendicular_counterexample(
    int grid = 10, std::size_t plans = 100, std::uint64_t seed = 1, const ProbeSettings& probe = {});

struct CounterexampleReport {
  CounterexampleKind kind = CounterexampleKind::atomic;
  std::vector<CheckResult> checks;

  bool ok() const;
};

CounterexampleReport reproduce_counterexample(const CounterexampleRun& run);
CounterexampleReport reproduce_counterexample(const std::string& name);

}  // namespace layered_ot
