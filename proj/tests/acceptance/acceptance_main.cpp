// Acceptance suite: one PASS/FAIL line per criterion, exit 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "layered_ot/config.hpp"
#include "layered_ot/costs.hpp"
#include "layered_ot/report.hpp"
#include "layered_ot/solver.hpp"
#include "layered_ot/structure.hpp"
#include "layered_ot/uniqueness.hpp"
#include "oracles.hpp"

using namespace layered_ot;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : " ") + std::string("failed:") + what;
    }
  }
  void note(const std::string& kv) { detail += (detail.empty() ? "" : " ") + kv; }
};

// Every duality certificate seen by the suite, for criterion 7.
struct DualityLedger {
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst_gap_ratio = 0.0;
  std::vector<std::string> failed;

  void record(const std::string& label, const DualityCheck& d) {
    ++instances;
    if (d.gap_tol > 0.0) worst_gap_ratio = std::max(worst_gap_ratio, d.gap / d.gap_tol);
    if (!d.ok) {
      ++failures;
      failed.push_back(label);
    }
  }
  void record(const std::string& label, const TheoremVerdict& v) {
    for (const auto& c : v.solver)
      if (c.name == "duality") {
        ++instances;
        if (c.status != CheckStatus::pass) {
          ++failures;
          failed.push_back(label);
        }
      }
  }
};

DualityLedger g_duality;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const CheckResult* find(const std::vector<CheckResult>& v, const std::string& name) {
  for (const auto& c : v)
    if (c.name == name) return &c;
  return nullptr;
}

std::string field(const CheckResult* c, const std::string& key) {
  if (!c) return "";
  for (const auto& [k, v] : c->fields)
    if (k == key) return v;
  return "";
}

bool passed(const CheckResult* c) { return c && c->status == CheckStatus::pass; }

int as_int(const std::string& s) { return s.empty() ? -1 : std::stoi(s); }

std::string failing_checks(const TheoremVerdict& v) {
  std::string s;
  for (const CheckResult* c : v.all_checks())
    if (c->status == CheckStatus::fail) s += (s.empty() ? "" : ",") + c->name;
  return s;
}

CostModel saddle_cost() {
  // c(x,y) = y_1 [x_2 (1 - x_1)/2 + |x|^2 - 1]; on the unit circle the gap
  // against y = 0 is x_2 (1 - x_1)/2, with three critical points.
  auto eval = [](const Point& x, const Point& y) {
    return y[0] * (x[1] * (1.0 - x[0]) / 2.0 + x[0] * x[0] + x[1] * x[1] - 1.0);
  };
  auto grad = [](const Point& x, const Point& y) {
    return Point{y[0] * (-x[1] / 2.0 + 2.0 * x[0]), y[0] * ((1.0 - x[0]) / 2.0 + 2.0 * x[1])};
  };
  return CostModel::custom("saddle", eval, grad);
}

DiscreteMeasure random_measure(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point> pts(n, Point(dim));
  for (auto& p : pts)
    for (double& v : p) v = u(rng);
  return DiscreteMeasure(pts, oracle::random_simplex(rng, n));
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  CounterexampleRun run;
  run.kind = CounterexampleKind::atomic;
  run.grid = 100;
  const TheoremVerdict v = run_theorem_scenario(run);
  g_duality.record("atomic", v);
  o.require(v.ok(), "verdict(" + failing_checks(v) + ")");
  for (const char* name : {"atomic_plans_feasible", "atomic_plans_optimal", "atomic_analytic_value", "face_probe"})
    o.require(passed(find(v.counterexample, name)), name);
  const CheckResult* val = find(v.counterexample, "atomic_analytic_value");
  const CheckResult* face = find(v.counterexample, "face_probe");
  o.require(as_int(field(face, "dim_lb")) >= 1, "dim_lb>=1");
  o.note("value=" + field(val, "value") + " err=" + field(val, "err"));
  o.note("dim_lb=" + field(face, "dim_lb"));
  return o;
}

Outcome criterion2() {
  Outcome o;
  CounterexampleRun run;
  run.kind = CounterexampleKind::perpendicular;
  run.grid = 10;
  run.plans = 100;
  const TheoremVerdict v = run_theorem_scenario(run);
  g_duality.record("perpendicular", v);
  o.require(v.ok(), "verdict(" + failing_checks(v) + ")");
  const CheckResult* spread = find(v.counterexample, "perpendicular_spread");
  const CheckResult* face = find(v.counterexample, "face_probe");
  o.require(passed(spread), "perpendicular_spread");
  o.require(passed(face) && as_int(field(face, "dim_lb")) >= 1, "dim_lb>=1");
  o.note("plans=" + field(spread, "plans") + " spread=" + field(spread, "spread"));
  o.note("dim_lb=" + field(face, "dim_lb"));
  return o;
}

// face_probe dim 0, no (c,P)-extremality violations, graph decomposition.
void layered_checks(Outcome& o, const TheoremVerdict& v, const std::string& label, int& runs) {
  ++runs;
  const CheckResult* face = find(v.conclusions, "face_probe");
  const CheckResult* ext = find(v.conclusions, "cp_extremality");
  const CheckResult* gd = find(v.conclusions, "graph_decomposition");
  o.require(v.ok(), label + "(" + failing_checks(v) + ")");
  o.require(passed(face) && field(face, "dim_lb") == "0", label + ":dim_lb=0");
  o.require(passed(ext) && field(ext, "violations") == "0", label + ":cp_extremality");
  o.require(passed(gd) && field(gd, "max_partners_per_layer") == "1", label + ":graph_decomposition");
  if (gd) o.require(std::stod(field(gd, "alpha_sum_err")) <= 1e-9, label + ":alpha_sum");
}

Outcome criterion3() {
  Outcome o;
  int runs = 0;
  for (double p : {2.0, 3.0})
    for (int K : {2, 3})
      for (int grid : {20, 40}) {
        LayeredRun r;
        r.scenario.K = K;
        r.scenario.n = 1;
        r.scenario.grid = grid;
        r.scenario.target_grid = grid / 5;
        r.scenario.perturb = Perturbation::quantized;
        r.scenario.amplitude = 0.3;
        r.scenario.seed = 1;
        // Quantized layer masses must be whole multiples of the 1/grid cell mass.
        if (K == 3) r.scenario.t = {0.35, 0.35, 0.3};
        r.cost = CostModel::power(p);
        r.probe.trials = 20;
        const std::string label = "p" + num(p) + "K" + std::to_string(K) + "g" + std::to_string(grid);
        const TheoremVerdict v = run_theorem_scenario(r);
        g_duality.record(label, v);
        layered_checks(o, v, label, runs);
      }
  o.note("runs=" + std::to_string(runs) + " trials=20");
  return o;
}

Outcome criterion4() {
  Outcome o;
  int runs = 0;
  struct Case {
    PlaneSpec source;
    std::vector<PlaneSpec> layers;
  };
  const std::vector<Case> cases{
      {{{0.0, 0.0}, {0.0, 1.0}}, {{{0.0, 1.0}, {0.3, 1.0}}, {{0.0, 2.5}, {-0.5, 1.0}}}},
      {{{0.0, 0.0}, {0.2, 1.0}}, {{{0.0, 1.5}, {-0.4, 1.0}}, {{0.0, 3.0}, {0.6, 1.0}}}},
  };
  double min_dot = 1.0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    TiltedRun r;
    r.scenario.grid = 20;
    r.scenario.target_grid = 4;
    r.scenario.perturb = Perturbation::quantized;
    r.scenario.source = cases[c].source;
    r.scenario.layers = cases[c].layers;
    r.probe.trials = 20;
    const std::string label = "tilted" + std::to_string(c + 1);
    const TheoremVerdict v = run_theorem_scenario(r);
    g_duality.record(label, v);
    const double d = std::stod(field(find(v.hypotheses, "normals_not_perpendicular"), "min_abs_dot"));
    min_dot = std::min(min_dot, d);
    o.require(d >= 0.1, label + ":min_abs_dot");
    layered_checks(o, v, label, runs);
  }
  // Second layer perpendicular to the source: symmetric grids on both sides.
  TiltedRun flip;
  flip.expect = Expectation::counterexample;
  flip.scenario.grid = 10;
  flip.scenario.target_grid = 10;
  flip.scenario.source = {{0.0, 0.0}, {0.0, 1.0}};
  flip.scenario.layers = {{{0.0, 1.0}, {0.0, 1.0}}, {{-1.0, 0.0}, {1.0, 0.0}}};
  const TheoremVerdict v = run_theorem_scenario(flip);
  g_duality.record("flip", v);
  const CheckResult* face = find(v.counterexample, "face_probe");
  o.require(v.ok(), "flip(" + failing_checks(v) + ")");
  o.require(!v.hypotheses_hold(), "flip:hypothesis_detected");
  o.require(passed(face) && as_int(field(face, "dim_lb")) >= 1, "flip:dim_lb>=1");
  o.note("runs=" + std::to_string(runs) + " min_abs_dot=" + num(min_dot) + " flip_dim_lb=" + field(face, "dim_lb"));
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::size_t worst_partners = 0, worst_cell = 0;
  double worst_reopt = 0.0;
  int runs = 0;
  for (std::uint64_t seed : {1, 2, 3, 7}) {
    ThreeMarginalRun r;
    r.scenario.K = 2;
    r.scenario.L = 2;
    r.scenario.grid = 12;
    r.scenario.target_grid = 3;
    r.scenario.perturb = Perturbation::quantized;
    r.scenario.jitter = 0.5;
    r.scenario.seed = seed;
    const std::string label = "seed" + std::to_string(seed);
    const TheoremVerdict v = run_theorem_scenario(r);
    g_duality.record(label, v);
    ++runs;
    const auto& m = v.artifacts.measures;
    o.require(m.size() == 3 && m[0].size() <= 12 && m[1].size() <= 12 && m[2].size() <= 12, label + ":sizes");
    const CheckResult* lc = find(v.conclusions, "layer_cells");
    const CheckResult* ro = find(v.conclusions, "restriction_optimality");
    const CheckResult* pj = find(v.conclusions, "projected_set");
    o.require(v.ok(), label + "(" + failing_checks(v) + ")");
    o.require(passed(lc), label + ":layer_cells");
    o.require(passed(ro), label + ":restriction_optimality");
    o.require(passed(pj), label + ":projected_set");
    worst_partners = std::max<std::size_t>(worst_partners, as_int(field(lc, "max_partners")));
    worst_cell = std::max<std::size_t>(worst_cell, as_int(field(lc, "max_per_cell")));
    if (ro) worst_reopt = std::max(worst_reopt, std::stod(field(ro, "reopt_err")));
  }
  o.require(worst_partners <= 4 && worst_cell <= 1, "partner_bounds");
  o.require(worst_reopt <= 1e-8, "reopt<=1e-8");
  o.note("runs=" + std::to_string(runs) + " max_partners=" + std::to_string(worst_partners) +
         " max_per_cell=" + std::to_string(worst_cell) + " reopt_err=" + num(worst_reopt));
  return o;
}

Outcome criterion6() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> size2(1, 6), size3(1, 3);
  double worst2 = 0.0, worst3 = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = size2(rng), n = size2(rng);
    TwoMarginalProblem p{oracle::random_simplex(rng, m), oracle::random_simplex(rng, n),
                         oracle::random_costs(rng, m, n), t % 5 == 4 ? Sense::maximize : Sense::minimize};
    const auto sol = solve_two_marginal(p);
    g_duality.record("two" + std::to_string(t), check_duality(p, sol.plan, sol.cert, default_tol_s(p.cost.max_abs())));
    double best = p.sense == Sense::minimize ? INFINITY : -INFINITY;
    for_each_vertex(p.a, p.b, [&](const TransportPlan& v) {
      const double val = v.objective(p.cost);
      best = p.sense == Sense::minimize ? std::min(best, val) : std::max(best, val);
    });
    worst2 = std::max(worst2, std::abs(sol.cert.primal - best));
  }
  for (int t = 0; t < 20; ++t) {
    const auto mu = random_measure(rng, size3(rng), 2);
    const auto nu = random_measure(rng, size3(rng), 2);
    const auto ga = random_measure(rng, size3(rng), 2);
    const auto p = make_problem(mu, nu, ga, CostModel::surplus3(), Sense::maximize);
    const auto sol = solve_three_marginal(p);
    g_duality.record("three" + std::to_string(t), check_duality(p, sol.plan, sol.cert, default_tol_s(p.cost.max_abs())));
    worst3 = std::max(worst3, std::abs(sol.cert.primal - oracle::three_marginal_optimum(p)));
  }
  o.require(worst2 <= 1e-10, "two_marginal");
  o.require(worst3 <= 1e-10, "three_marginal");
  o.note("two=50 max_err2=" + num(worst2) + " three=20 max_err3=" + num(worst3));
  return o;
}

Outcome criterion7() {
  Outcome o;
  o.require(g_duality.instances > 0, "no_instances");
  o.require(g_duality.failures == 0, std::to_string(g_duality.failures) + "_certificates");
  for (const auto& f : g_duality.failed) o.note("bad=" + f);
  o.note("instances=" + std::to_string(g_duality.instances) + " worst_gap/tol=" + num(g_duality.worst_gap_ratio));
  return o;
}

Outcome criterion8() {
  Outcome o;
  const std::vector<CostModel> models{CostModel::quadratic(), CostModel::power(1.5), CostModel::power(3.0),
                                      CostModel::log_cosh(), CostModel::surplus3()};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (const auto& m : models)
    for (int t = 0; t < 100; ++t) {
      PointTuple tuple(m.arity(), Point(3));
      for (auto& p : tuple)
        for (double& v : p) v = u(rng);
      const auto g = grad_x_cost(m, tuple).grad_x;
      const auto fd = finite_difference_grad_x(m, tuple, 1e-6);
      double num_err = 0.0, scale = 1.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        num_err = std::max(num_err, std::abs(g[i] - fd[i]));
        scale = std::max(scale, std::abs(fd[i]));
      }
      worst = std::max(worst, num_err / scale);
    }
  o.require(worst <= 1e-5, "relative_error");
  o.note("families=" + std::to_string(models.size()) + " tuples=100 max_rel_err=" + num(worst));
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto chart = circle_chart({0.0, 0.0}, 1.0, 360);
  const auto quad = subtwist_gap(CostModel::quadratic(), {2.0, 0.0}, {-2.0, 0.0}, chart);
  const std::size_t n_quad = count_critical_points(quad);
  const auto saddle = subtwist_gap(saddle_cost(), {1.0, 0.0}, {0.0, 0.0}, chart);
  const std::size_t n_saddle = count_critical_points(saddle);
  const DiscreteMeasure pair({{1.0, 0.0}, {0.0, 0.0}}, {0.5, 0.5});
  const auto rep = check_subtwist_uniqueness_setup(saddle_cost(), chart, pair, 0);
  o.require(n_quad == 2, "quadratic_circle");
  o.require(n_saddle == 3, "saddle_cost");
  o.require(rep.pairs_above_two == 1, "saddle_reported");
  o.note("quadratic=" + std::to_string(n_quad) + " saddle=" + std::to_string(n_saddle) +
         " pairs_above_two=" + std::to_string(rep.pairs_above_two));
  return o;
}

Outcome criterion10() {
  Outcome o;
  double worst_sine = 0.0, min_single = 1.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    BoundaryRun r;
    r.theorem = TheoremId::C6_2;
    r.shape = Shape::ball(2);
    r.mixed.split = 0.5;
    r.mixed.boundary_nodes = 32;
    r.mixed.jitter = 0.5;
    r.mixed.seed = seed;
    r.fan.seed = seed;
    r.probe.seed = seed;
    r.grid = 24;
    const std::string label = "seed" + std::to_string(seed);
    const TheoremVerdict v = run_theorem_scenario(r);
    g_duality.record(label, v);
    const CheckResult* bn = find(v.conclusions, "boundary_normal_lines");
    const CheckResult* is = find(v.conclusions, "interior_single_valued");
    const CheckResult* face = find(v.conclusions, "face_probe");
    o.require(v.ok(), label + "(" + failing_checks(v) + ")");
    o.require(passed(bn), label + ":normal_lines");
    o.require(passed(is), label + ":interior_single");
    o.require(passed(face) && field(face, "dim_lb") == "0", label + ":dim_lb=0");
    if (bn) worst_sine = std::max(worst_sine, std::stod(field(bn, "worst_sine")));
    if (is) min_single = std::min(min_single, std::stod(field(is, "fraction")));
  }
  o.note("seeds=3 worst_sine=" + num(worst_sine) + " min_interior_single=" + num(min_single));
  return o;
}

Outcome criterion11() {
  Outcome o;
  const std::vector<std::pair<std::string, std::string>> configs{
      {"t31.cfg",
       "scenario = t31_layered\nseed = 3\ncost.family = power\ncost.p = 3\ngeometry.K = 3\n"
       "geometry.grid = 30\nmeasure.perturb = quantized\n"},
      {"t41.cfg",
       "scenario = t41_threemarginal\nseed = 7\ncost.family = surplus3\ngeometry.grid = 12\n"
       "measure.perturb = quantized\n"},
      {"t61.cfg",
       "scenario = t61_boundary\ntheorem = C6.2\ncost.family = quadratic\ngeometry.grid = 24\n"
       "geometry.boundary_nodes = 32\nmeasure.split = 0.5\n"},
      {"cex.cfg", "scenario = cex_atomic\ncost.family = quadratic\n"},
  };
  std::size_t bytes = 0;
  for (const auto& [name, text] : configs) {
    std::string out[2];
    for (auto& s : out) {
      const RunSettings rs = build_run_settings(parse_config(text, name));
      const TheoremVerdict v = run_theorem_scenario(rs.spec);
      s = summary_text(v, SummaryHeader{name, rs.kind, rs.seed});
    }
    o.require(!out[0].empty() && out[0] == out[1], name);
    bytes += out[0].size();
  }
  o.note("configs=" + std::to_string(configs.size()) + " bytes=" + std::to_string(bytes));
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  // Criterion 7 reads the ledger filled by the others, so it runs last.
  const std::vector<Criterion> criteria{
      {1, "atomic_counterexample", 1.0, criterion1},
      {2, "perpendicular_counterexample", 1.0, criterion2},
      {3, "layered_uniqueness", 30.0, criterion3},
      {4, "tilted_layers", 30.0, criterion4},
      {5, "three_marginal_structure", 60.0, criterion5},
      {6, "oracle_equivalence", 60.0, criterion6},
      {8, "gradient_checks", 0.0, criterion8},
      {9, "subtwist_detector", 0.0, criterion9},
      {10, "boundary_normal_structure", 30.0, criterion10},
      {11, "determinism", 0.0, criterion11},
      {7, "duality", 0.0, criterion7},
  };
  std::vector<std::string> lines(12);
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception=") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0.0 && secs >= c.limit_s) {
      o.pass = false;
      o.note("failed:runtime");
    }
    std::ostringstream line;
    line << "CRITERION " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " " << c.name << " " << o.detail
         << " time=" << num(secs) << "s";
    if (c.limit_s > 0.0) line << " limit=" << num(c.limit_s) << "s";
    lines[c.id] = line.str();
    if (!o.pass) ++failures;
  }
  for (int id = 1; id <= 11; ++id) std::printf("%s\n", lines[id].c_str());
  std::printf("ACCEPTANCE %s %d/11\n", failures ? "FAIL" : "PASS", 11 - failures);
  return failures ? 1 : 0;
}
