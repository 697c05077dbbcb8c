#include "layered_ot/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "format.hpp"
#include "layered_ot/errors.hpp"
#include "layered_ot/multimarginal.hpp"
#include "layered_ot/structure.hpp"

namespace layered_ot {

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::T3_1: return "T3.1";
    case TheoremId::T3_2: return "T3.2";
    case TheoremId::T4_1: return "T4.1";
    case TheoremId::T5_3: return "T5.3";
    case TheoremId::T6_1: return "T6.1";
    case TheoremId::C6_2: return "C6.2";
  }
  return "?";
}

TheoremId parse_theorem_id(const std::string& s) {
  for (TheoremId id : {TheoremId::T3_1, TheoremId::T3_2, TheoremId::T4_1, TheoremId::T5_3,
                       TheoremId::T6_1, TheoremId::C6_2}) {
    std::string dotted = to_string(id), under = dotted;
    std::replace(under.begin(), under.end(), '.', '_');
    if (s == dotted || s == under) return id;
  }
  throw ConfigError("unknown theorem id '" + s + "'");
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::skip: return "SKIP";
  }
  return "?";
}

void CheckResult::add(const std::string& key, const std::string& value) { fields.emplace_back(key, value); }
void CheckResult::add(const std::string& key, double value) { add(key, detail::fmt_real(value, 6)); }
void CheckResult::add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
void CheckResult::add(const std::string& key, int value) { add(key, std::to_string(value)); }
void CheckResult::add(const std::string& key, bool value) { add(key, std::string(value ? "1" : "0")); }

std::string to_string(CounterexampleKind k) {
  return k == CounterexampleKind::atomic ? "atomic" : "perpendicular";
}

CounterexampleKind parse_counterexample(const std::string& s) {
  if (s == "atomic") return CounterexampleKind::atomic;
  if (s == "perpendicular") return CounterexampleKind::perpendicular;
  throw ConfigError("unknown counterexample '" + s + "' (atomic|perpendicular)");
}

bool TheoremVerdict::hypotheses_hold() const {
  for (const auto& h : hypotheses)
    if (h.name != "hypotheses_expected" && h.status != CheckStatus::pass) return false;
  return true;
}

std::vector<const CheckResult*> TheoremVerdict::all_checks() const {
  std::vector<const CheckResult*> out;
  for (const auto* section : {&hypotheses, &solver, &conclusions, &counterexample})
    for (const auto& c : *section) out.push_back(&c);
  return out;
}

bool TheoremVerdict::ok() const {
  for (const CheckResult* c : all_checks())
    if (c->status == CheckStatus::fail) return false;
  return true;
}

bool CounterexampleReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.status != CheckStatus::fail; });
}

namespace {

CheckResult check(const std::string& name, bool ok) {
  CheckResult c;
  c.name = name;
  c.status = ok ? CheckStatus::pass : CheckStatus::fail;
  return c;
}

CheckResult skipped(const std::string& name, const std::string& reason) {
  CheckResult c;
  c.name = name;
  c.status = CheckStatus::skip;
  c.add("reason", reason);
  return c;
}

// A failed hypothesis is SKIP (theorem not applicable) in a counterexample run.
CheckResult hypothesis(const std::string& name, bool holds, Expectation e) {
  CheckResult c;
  c.name = name;
  c.status = holds ? CheckStatus::pass
                   : (e == Expectation::counterexample ? CheckStatus::skip : CheckStatus::fail);
  c.add("holds", holds);
  return c;
}

void finish_hypotheses(TheoremVerdict& v) {
  const bool hold = v.hypotheses_hold();
  CheckResult c = check("hypotheses_expected", hold == (v.expect == Expectation::hypotheses_hold));
  c.add("expect", std::string(v.expect == Expectation::hypotheses_hold ? "hold" : "violated"));
  c.add("hold", hold);
  v.hypotheses.push_back(std::move(c));
}

void skip_conclusions(TheoremVerdict& v, std::initializer_list<const char*> names) {
  for (const char* n : names) v.conclusions.push_back(skipped(n, "hypothesis"));
}

FaceProbeOptions probe_options(const ProbeSettings& s, std::uint64_t seed) {
  FaceProbeOptions o;
  o.trials = s.trials;
  o.seed = seed;
  o.tol_face = s.tol_face;
  o.tol_plan = s.tol_plan;
  o.parallel = s.parallel;
  return o;
}

std::uint64_t agreement_seed(std::uint64_t base, int r) {
  return base + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r);
}

template <class P>
std::vector<std::vector<double>> marginals_of(const P& p) {
  if constexpr (std::is_same_v<P, ThreeMarginalProblem>)
    return {p.a, p.b, p.c};
  else
    return {p.a, p.b};
}

template <class P, class S>
void solver_checks(TheoremVerdict& v, const P& p, const S& sol) {
  CheckResult f = check("feasibility", true);
  try {
    sol.plan.check_feasible(marginals_of(p), 1e-9);
  } catch (const DataError& e) {
    f.status = CheckStatus::fail;
    f.add("error", std::string("marginals"));
  }
  f.add("support", sol.plan.support_size());
  v.solver.push_back(std::move(f));
  const double tol_s = default_tol_s(p.cost.max_abs());
  const DualityCheck d = check_duality(p, sol.plan, sol.cert, tol_s);
  CheckResult c = check("duality", d.ok);
  c.add("value", sol.cert.primal);
  c.add("gap", d.gap);
  c.add("gap_tol", d.gap_tol);
  c.add("dual_violation", d.max_dual_violation);
  c.add("outside_s", d.support_outside_s);
  c.add("tol_s", tol_s);
  v.solver.push_back(std::move(c));
}

CheckResult face_unique(const FaceProbe& f) {
  CheckResult c = check("face_probe", f.face_dimension_lb == 0);
  c.add("dim_lb", f.face_dimension_lb);
  c.add("trials", f.witnesses.size());
  c.add("face_cells", f.face_cells);
  c.add("max_dev", f.max_deviation);
  return c;
}

CheckResult face_nonunique(const FaceProbe& f) {
  CheckResult c = check("face_probe", f.face_dimension_lb >= 1 && f.witnesses_optimal);
  c.add("dim_lb>=1", std::string());
  c.add("dim_lb", f.face_dimension_lb);
  c.add("witnesses_optimal", f.witnesses_optimal);
  c.add("trials", f.witnesses.size());
  c.add("max_dev", f.max_deviation);
  return c;
}

template <class P, class S>
CheckResult seed_agreement(const P& p, const S& sol, const ProbeSettings& s, const FaceProbe& first) {
  if (first.face_dimension_lb != 0) return skipped("seed_agreement", "not_unique");
  CheckResult c = check("seed_agreement", true);
  std::string dims = "0";
  for (int r = 1; r <= s.agreement_seeds; ++r) {
    const FaceProbe f = probe_optimal_face(p, sol, probe_options(s, agreement_seed(s.seed, r)));
    dims += "," + std::to_string(f.face_dimension_lb);
    if (f.face_dimension_lb != 0) c.status = CheckStatus::fail;
  }
  c.add("seeds", s.agreement_seeds + 1);
  c.add("dims", dims);
  return c;
}

bool is_strictly_convex_h(const CostModel& m) {
  switch (m.family()) {
    case CostFamily::power: return m.p() > 1.0;
    case CostFamily::quadratic:
    case CostFamily::log_cosh: return true;
    default: return false;
  }
}

std::size_t count_atoms(const DiscreteMeasure& m) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) n += m.is_atom(i) && m.weight(i) > 0.0;
  return n;
}

// Charged atoms outside the first layer of the ordered partition.
std::size_t atoms_beyond_first(const DiscreteMeasure& target, const LayeredSpace& space) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < target.size(); ++j)
    if (target.is_atom(j) && target.weight(j) > 0.0 && space.rank_of(target.tag(j)) > 0) ++n;
  return n;
}

double min_offset_gap(const LayeredSpace& space) {
  double gap = INFINITY;
  const auto& ls = space.layers();
  for (std::size_t a = 0; a < ls.size(); ++a)
    for (std::size_t b = a + 1; b < ls.size(); ++b) gap = std::min(gap, std::abs(ls[a].offset - ls[b].offset));
  return gap;
}

double min_abs_normal_dot(const Point& n, const LayeredSpace& space) {
  double m = INFINITY;
  for (const Layer& l : space.layers()) m = std::min(m, std::abs(dot(n, l.normal)));
  return m;
}

void layer_hypotheses(TheoremVerdict& v, const LayeredScenario& sc) {
  CheckResult a = hypothesis("source_absolutely_continuous", count_atoms(sc.source) == 0, v.expect);
  a.add("atoms", count_atoms(sc.source));
  v.hypotheses.push_back(std::move(a));
  const std::size_t beyond = atoms_beyond_first(sc.target, sc.space);
  CheckResult b = hypothesis("target_layers_nonatomic", beyond == 0, v.expect);
  b.add("atoms_beyond_first", beyond);
  v.hypotheses.push_back(std::move(b));
}

void layered_conclusions(TheoremVerdict& v, const LayeredScenario& sc, const CostModel& cost,
                         const TwoMarginalProblem& p, const TwoMarginalSolution& sol,
                         const ProbeSettings& ps, std::size_t twist_samples,
                         std::size_t cycle_samples) {
  const FaceProbe face = probe_optimal_face(p, sol, probe_options(ps, ps.seed));
  v.conclusions.push_back(face_unique(face));

  const SupportMap support = build_support_map(sol.plan, 1e-10, &sc.target, &sc.space);
  const auto kfp = kappa_and_fP(support, sc.target, sc.space, p.cost);
  const ExtremalityReport ext = check_cP_extremality(support, kfp, sc.source, sc.target);
  CheckResult e = check("cp_extremality", ext.holds());
  e.add("violations", ext.violation_count);
  e.add("condition1", ext.condition1_holds);
  e.add("multi_fp", ext.multi_valued_fp);
  v.conclusions.push_back(std::move(e));

  bool graphs_ok = false;
  CheckResult g = check("graph_decomposition", false);
  try {
    const GraphDecomposition gd = decompose_graphs(sol.plan, sc.target, sc.space, sc.source);
    const TransportPlan back = reconstruct_plan(gd, sc.source, sc.target.size());
    double recon = 0.0;
    const auto d0 = sol.plan.dense(), d1 = back.dense();
    for (std::size_t t = 0; t < d0.size(); ++t) recon = std::max(recon, std::abs(d0[t] - d1[t]));
    graphs_ok = gd.max_alpha_sum_error <= 1e-9 && recon <= 1e-12;
    g.status = graphs_ok ? CheckStatus::pass : CheckStatus::fail;
    g.add("K", gd.K);
    g.add("max_partners_per_layer", std::size_t{1});
    g.add("alpha_sum_err", gd.max_alpha_sum_error);
    g.add("reconstruction", recon);
  } catch (const StructureViolation&) {
    g.add("max_partners_per_layer", std::string(">1"));
  }
  v.conclusions.push_back(std::move(g));

  const std::size_t order = count_layer_order_violations(support, kfp, sc.target, sc.space);
  CheckResult o = check("layer_order", order == 0);
  o.add("violations", order);
  v.conclusions.push_back(std::move(o));

  const TwistReport tw = count_twist(sc.source, sc.target, cost, 1e-7, twist_samples, ps.seed);
  const std::size_t K = sc.space.size();
  CheckResult t = check("twist", tw.max_count <= K && !tw.samples.empty());
  t.add("max_count", tw.max_count);
  t.add("K", K);
  t.add("samples", tw.samples.size());
  t.add("skipped", tw.skipped);
  v.conclusions.push_back(std::move(t));

  const auto cm = check_cyclical_monotonicity(support, p.cost, p.sense, 5, cycle_samples, ps.seed);
  CheckResult m = check("cyclical_monotonicity", cm.holds());
  m.add("two_cycles", cm.two_cycles_checked);
  m.add("violations", cm.two_cycle_violations + cm.sampled_violations);
  m.add("sampled", cm.sampled_cycles);
  v.conclusions.push_back(std::move(m));

  v.conclusions.push_back(seed_agreement(p, sol, ps, face));
  v.unique_evidence = face.face_dimension_lb == 0 && ext.violation_count == 0 && graphs_ok;
}

constexpr std::initializer_list<const char*> kLayeredSkips = {
    "face_probe", "cp_extremality", "graph_decomposition", "layer_order",
    "twist", "cyclical_monotonicity", "seed_agreement"};

// Conclusions when hypotheses hold, otherwise a non-uniqueness face probe.
template <class P, class S, class F>
void conclude(TheoremVerdict& v, const P& p, const S& sol, const ProbeSettings& ps,
              std::initializer_list<const char*> names, F&& conclusions) {
  if (v.hypotheses_hold()) {
    conclusions();
    return;
  }
  std::vector<const char*> rest;
  for (const char* n : names)
    if (std::string(n) != "face_probe") rest.push_back(n);
  for (const char* n : rest) v.conclusions.push_back(skipped(n, "hypothesis"));
  v.counterexample.push_back(face_nonunique(probe_optimal_face(p, sol, probe_options(ps, ps.seed))));
}

RunArtifacts artifacts(std::vector<DiscreteMeasure> measures, const TransportPlan& plan,
                       const DualCertificate& cert) {
  RunArtifacts a;
  a.measures = std::move(measures);
  a.plan = plan;
  a.cert = cert;
  return a;
}

}  // namespace

TheoremVerdict run_theorem_scenario(const LayeredRun& run) {
  TheoremVerdict v;
  v.id = run.theorem;
  v.scenario = "t31_layered";
  v.expect = run.expect;
  const LayeredScenario sc = make_layered_scenario(run.scenario);
  layer_hypotheses(v, sc);
  const double gap = min_offset_gap(sc.space);
  CheckResult d = hypothesis("distinct_layer_offsets", gap > 1e-12, v.expect);
  d.add("min_gap", gap);
  v.hypotheses.push_back(std::move(d));
  CheckResult c = hypothesis("strictly_convex_cost", is_strictly_convex_h(run.cost), v.expect);
  c.add("family", run.cost.name());
  v.hypotheses.push_back(std::move(c));
  finish_hypotheses(v);

  const auto p = make_problem(sc.source, sc.target, run.cost, Sense::minimize);
  const auto sol = solve_two_marginal(p);
  solver_checks(v, p, sol);
  conclude(v, p, sol, run.probe, kLayeredSkips, [&] {
    layered_conclusions(v, sc, run.cost, p, sol, run.probe, run.twist_samples, run.cycle_samples);
  });
  v.artifacts = artifacts({sc.source, sc.target}, sol.plan, sol.cert);
  return v;
}

TheoremVerdict run_theorem_scenario(const TiltedRun& run) {
  TheoremVerdict v;
  v.id = run.theorem;
  v.scenario = "t32_tilted";
  v.expect = run.expect;
  const LayeredScenario sc = make_tilted_scenario(run.scenario);
  layer_hypotheses(v, sc);
  const Point n = unit(run.scenario.source.normal);
  const double mdot = min_abs_normal_dot(n, sc.space);
  CheckResult h = hypothesis("normals_not_perpendicular", mdot > 1e-9, v.expect);
  h.add("min_abs_dot", mdot);
  v.hypotheses.push_back(std::move(h));
  CheckResult c = hypothesis("quadratic_cost", run.cost.family() == CostFamily::quadratic, v.expect);
  c.add("family", run.cost.name());
  v.hypotheses.push_back(std::move(c));
  finish_hypotheses(v);

  const auto p = make_problem(sc.source, sc.target, run.cost, Sense::minimize);
  const auto sol = solve_two_marginal(p);
  solver_checks(v, p, sol);
  conclude(v, p, sol, run.probe, kLayeredSkips, [&] {
    layered_conclusions(v, sc, run.cost, p, sol, run.probe, run.twist_samples, run.cycle_samples);
  });
  v.artifacts = artifacts({sc.source, sc.target}, sol.plan, sol.cert);
  return v;
}

TheoremVerdict run_theorem_scenario(const ThreeMarginalRun& run) {
  TheoremVerdict v;
  v.id = run.theorem;
  v.scenario = "t41_threemarginal";
  v.expect = run.expect;
  const ThreeMarginalScenario sc = make_three_marginal_scenario(run.scenario);
  CheckResult a = hypothesis("source_absolutely_continuous", count_atoms(sc.x) == 0, v.expect);
  a.add("atoms", count_atoms(sc.x));
  v.hypotheses.push_back(std::move(a));
  const std::size_t by = atoms_beyond_first(sc.y, sc.y_space), bz = atoms_beyond_first(sc.z, sc.z_space);
  CheckResult b = hypothesis("target_layers_nonatomic", by + bz == 0, v.expect);
  b.add("atoms_beyond_first_y", by);
  b.add("atoms_beyond_first_z", bz);
  v.hypotheses.push_back(std::move(b));
  const double gy = min_offset_gap(sc.y_space), gz = min_offset_gap(sc.z_space);
  CheckResult d = hypothesis("distinct_layer_offsets", gy > 1e-12 && gz > 1e-12, v.expect);
  d.add("min_gap_y", gy);
  d.add("min_gap_z", gz);
  v.hypotheses.push_back(std::move(d));
  CheckResult c = hypothesis("surplus_cost", run.cost.family() == CostFamily::surplus3, v.expect);
  c.add("family", run.cost.name());
  v.hypotheses.push_back(std::move(c));
  finish_hypotheses(v);

  const auto p = make_problem(sc.x, sc.y, sc.z, run.cost, Sense::maximize);
  const auto sol = solve_three_marginal(p);
  solver_checks(v, p, sol);
  const ProbeSettings& ps = run.probe;
  conclude(v, p, sol, ps,
           {"face_probe", "layer_cells", "restriction_optimality", "projected_set", "attainment",
            "twist3", "extreme_chain", "seed_agreement"},
           [&] {
             const FaceProbe face = probe_optimal_face(p, sol, probe_options(ps, ps.seed));
             v.conclusions.push_back(face_unique(face));

             const SupportMap support = build_support_map(sol.plan);
             const LayerCellReport cells = count_layer_cells(support, sc.y, sc.z);
             const std::size_t KL = sc.y_space.size() * sc.z_space.size();
             CheckResult lc = check("layer_cells", cells.max_partners <= KL && cells.max_per_cell <= 1);
             lc.add("max_partners", cells.max_partners);
             lc.add("KL", KL);
             lc.add("max_per_cell", cells.max_per_cell);
             lc.add("offenders", cells.offenders.size());
             v.conclusions.push_back(std::move(lc));

             const ReducedCost c2 = build_reduced_cost(p, sol.cert, 2, run.cost.name());
             const auto p2 = reduced_problem(p, c2);
             const RestrictionPair rp = restrict_plan(sol.plan);
             double phi3 = 0.0;
             for (std::size_t k = 0; k < p.c.size(); ++k) phi3 += p.c[k] * sol.cert.potentials[2][k];
             const double lam2 = rp.restricted.objective(c2.values);
             const auto again = solve_two_marginal(p2);
             const double tol8 = 1e-8;
             CheckResult ro = check("restriction_optimality",
                                    std::abs(lam2 - (sol.cert.primal - phi3)) <= tol8 &&
                                        std::abs(again.cert.primal - lam2) <= tol8);
             ro.add("restricted_value", lam2);
             ro.add("reoptimized_value", again.cert.primal);
             ro.add("identity_err", std::abs(lam2 - (sol.cert.primal - phi3)));
             ro.add("reopt_err", std::abs(again.cert.primal - lam2));
             v.conclusions.push_back(std::move(ro));

             const double tol_s = default_tol_s(p.cost.max_abs());
             const auto d2 = reduced_certificate(p2, sol.cert, rp.restricted);
             const ProjectionReport pr = check_projected_minimizing_set(minimizing_set(p, sol.cert, tol_s),
                                                                        minimizing_set(p2, d2, tol_s));
             CheckResult pj = check("projected_set", pr.equal());
             pj.add("projected", pr.projected_size);
             pj.add("reduced", pr.reduced_size);
             pj.add("only_projected", pr.only_projected.size());
             pj.add("only_reduced", pr.only_reduced.size());
             v.conclusions.push_back(std::move(pj));

             double att = 0.0;
             for (const auto& e : sol.plan.entries())
               att = std::max(att, std::abs(c2.values(e.idx[0], e.idx[1]) -
                                            (p.cost(e.idx[0], e.idx[1], e.idx[2]) -
                                             sol.cert.potentials[2][e.idx[2]])));
             CheckResult at = check("attainment", att <= 1e-9);
             at.add("max_err", att);
             v.conclusions.push_back(std::move(at));

             const TwistReport tw = count_twist3(support, sc.x, sc.y, sc.z, run.cost, 1e-7,
                                                 run.twist_samples, ps.seed);
             CheckResult t3 = check("twist3", tw.max_count <= KL);
             t3.add("max_count", tw.max_count);
             t3.add("KL", KL);
             t3.add("samples", tw.samples.size());
             v.conclusions.push_back(std::move(t3));

             const auto& dims = sol.plan.dims();
             if (*std::max_element(dims.begin(), dims.end()) > 5) {
               v.conclusions.push_back(skipped("extreme_chain", "size_above_5"));
             } else {
               const ExtremeChainReport ec = check_extreme_chain(sol.plan, rp.restricted);
               CheckResult x = check("extreme_chain", ec.direct_extreme);
               x.add("chain", ec.chain_certifies());
               x.add("direct", ec.direct_extreme);
               v.conclusions.push_back(std::move(x));
             }
             v.conclusions.push_back(seed_agreement(p, sol, ps, face));
             v.unique_evidence = face.face_dimension_lb == 0 && cells.max_per_cell <= 1 && pr.equal();
           });
  v.artifacts = artifacts({sc.x, sc.y, sc.z}, sol.plan, sol.cert);
  return v;
}

namespace {

ManifoldChart boundary_chart(const Shape& shape, int nodes) {
  if (shape.axes.size() != 2) throw UnsupportedShape("sub-twist chart needs a 2D shape");
  return ellipse_chart({0.0, 0.0}, shape.axes[0], shape.axes[1], nodes);
}

bool smooth_boundary(const Shape& s) { return s.kind != ShapeKind::box; }

bool strictly_convex_domain(const Shape& s) {
  return s.kind == ShapeKind::ball || s.kind == ShapeKind::ellipsoid;
}

DiscreteMeasure random_targets(int count, int dim, double box, std::uint64_t seed) {
  if (count < 1) throw ConfigError("targets must be positive");
  if (!(box > 0.0)) throw ConfigError("box must be positive");
  std::mt19937_64 rng(seed ^ 0xbb67ae8584caa73bULL);
  std::uniform_real_distribution<double> u(-box, box);
  std::vector<Point> pts(count, Point(dim));
  for (auto& q : pts)
    for (double& c : q) c = u(rng);
  return DiscreteMeasure(std::move(pts), std::vector<double>(count, 1.0 / count));
}

}  // namespace

TheoremVerdict run_theorem_scenario(const SubtwistRun& run) {
  TheoremVerdict v;
  v.id = run.theorem;
  v.scenario = "t53_subtwist";
  v.expect = run.expect;
  const MixedScenario src = make_mixed_boundary_scenario(run.mixed, run.shape, run.grid);
  const DiscreteMeasure tgt =
      random_targets(run.targets, static_cast<int>(run.shape.axes.size()), run.box, run.seed);

  const SubtwistReport st =
      check_subtwist_uniqueness_setup(run.cost, boundary_chart(run.shape, run.chart_nodes), tgt,
                                      run.pair_samples, run.seed);
  CheckResult h = hypothesis("subtwist", st.max_critical <= 2, v.expect);
  h.add("max_critical", st.max_critical);
  h.add("pairs", st.pairs_checked);
  h.add("pairs_above_two", st.pairs_above_two);
  v.hypotheses.push_back(std::move(h));
  std::size_t bnd = 0;
  for (Region r : src.region) bnd += r == Region::boundary;
  CheckResult m = hypothesis("mixed_source", bnd > 0 && count_atoms(src.measure) == 0, v.expect);
  m.add("boundary_nodes", bnd);
  m.add("interior_cells", src.region.size() - bnd);
  v.hypotheses.push_back(std::move(m));
  finish_hypotheses(v);

  const auto p = make_problem(src.measure, tgt, run.cost, Sense::minimize);
  const auto sol = solve_two_marginal(p);
  solver_checks(v, p, sol);
  const ProbeSettings& ps = run.probe;
  conclude(v, p, sol, ps, {"face_probe", "cyclical_monotonicity", "seed_agreement"}, [&] {
    const FaceProbe face = probe_optimal_face(p, sol, probe_options(ps, ps.seed));
    v.conclusions.push_back(face_unique(face));
    const auto cm = check_cyclical_monotonicity(build_support_map(sol.plan), p.cost, p.sense, 5,
                                                run.cycle_samples, ps.seed);
    CheckResult c = check("cyclical_monotonicity", cm.holds());
    c.add("two_cycles", cm.two_cycles_checked);
    c.add("violations", cm.two_cycle_violations + cm.sampled_violations);
    v.conclusions.push_back(std::move(c));
    v.conclusions.push_back(seed_agreement(p, sol, ps, face));
    v.unique_evidence = face.face_dimension_lb == 0;
  });
  v.artifacts = artifacts({src.measure, tgt}, sol.plan, sol.cert);
  return v;
}

TheoremVerdict run_theorem_scenario(const BoundaryRun& run) {
  if (run.theorem != TheoremId::T6_1 && run.theorem != TheoremId::C6_2)
    throw ConfigError("boundary scenario exercises T6.1 or C6.2");
  TheoremVerdict v;
  v.id = run.theorem;
  v.scenario = "t61_boundary";
  v.expect = run.expect;
  const bool corollary = run.theorem == TheoremId::C6_2;
  CheckResult q = hypothesis("quadratic_cost", run.cost.family() == CostFamily::quadratic, v.expect);
  q.add("family", run.cost.name());
  v.hypotheses.push_back(std::move(q));
  v.hypotheses.push_back(hypothesis("smooth_boundary", smooth_boundary(run.shape), v.expect));
  if (corollary)
    v.hypotheses.push_back(hypothesis("strictly_convex_domain", strictly_convex_domain(run.shape), v.expect));
  finish_hypotheses(v);

  const BoundaryFanScenario sc = make_boundary_fan_scenario(run.mixed, run.shape, run.grid, run.fan);
  const auto p = make_problem(sc.source.measure, sc.target, run.cost, Sense::minimize);
  const auto sol = solve_two_marginal(p);
  solver_checks(v, p, sol);
  const ProbeSettings& ps = run.probe;
  auto names = corollary ? std::initializer_list<const char*>{"boundary_normal_lines", "interior_single_valued",
                                                              "face_probe", "seed_agreement"}
                         : std::initializer_list<const char*>{"boundary_normal_lines", "interior_single_valued"};
  conclude(v, p, sol, ps, names, [&] {
    const BoundaryNormalReport r = check_boundary_normal_lines(sol.plan, sc.source, sc.target, run.tol_normal);
    CheckResult b = check("boundary_normal_lines", r.boundary_flagged.empty());
    b.add("boundary", r.boundary_sources);
    b.add("multi", r.boundary_multi);
    b.add("flagged", r.boundary_flagged.size());
    b.add("worst_sine", r.worst_sine);
    b.add("tol", run.tol_normal);
    v.conclusions.push_back(std::move(b));
    CheckResult i = check("interior_single_valued", r.interior_single_fraction() >= run.min_interior_single);
    i.add("interior", r.interior_sources);
    i.add("single", r.interior_single);
    i.add("fraction", r.interior_single_fraction());
    i.add("min_fraction", run.min_interior_single);
    v.conclusions.push_back(std::move(i));
    v.unique_evidence = r.boundary_flagged.empty();
    if (corollary) {
      const FaceProbe face = probe_optimal_face(p, sol, probe_options(ps, ps.seed));
      v.conclusions.push_back(face_unique(face));
      v.conclusions.push_back(seed_agreement(p, sol, ps, face));
      v.unique_evidence = v.unique_evidence && face.face_dimension_lb == 0;
    }
  });
  v.artifacts = artifacts({sc.source.measure, sc.target}, sol.plan, sol.cert);
  return v;
}

std::pair<TransportPlan, TransportPlan> atomic_counterexample_plans(const LayeredScenario& sc) {
  if (sc.target.size() != 2) throw UsageError("atomic counterexample has two target atoms");
  // Target 0 is (1,1), target 1 is (1,-1).
  std::vector<PlanEntry> e1, e2;
  for (std::size_t i = 0; i < sc.source.size(); ++i) {
    const double x = sc.source.point(i)[0];
    const bool first = (x >= 0.0 && x < 0.25) || (x >= 0.5 && x < 0.75);
    const int id = static_cast<int>(i);
    e1.push_back({{id, first ? 0 : 1, -1}, sc.source.weight(i)});
    e2.push_back({{id, first ? 1 : 0, -1}, sc.source.weight(i)});
  }
  return {TransportPlan({sc.source.size(), 2}, std::move(e1)),
          TransportPlan({sc.source.size(), 2}, std::move(e2))};
}

namespace {

bool feasible(const TransportPlan& plan, const std::vector<std::vector<double>>& w, double tol) {
  try {
    plan.check_feasible(w, tol);
    return true;
  } catch (const DataError&) {
    return false;
  }
}

double max_abs_difference(const TransportPlan& a, const TransportPlan& b) {
  const auto x = a.dense(), y = b.dense();
  double d = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) d = std::max(d, std::abs(x[t] - y[t]));
  return d;
}

struct AtomicRun {
  LayeredScenario sc;
  TwoMarginalProblem p;
  TwoMarginalSolution sol;
  AtomicCounterexampleReport report;
};

AtomicRun atomic_run(int grid, const ProbeSettings& ps) {
  AtomicRun r;
  r.sc = make_counterexample_atomic(grid);
  r.p = make_problem(r.sc.source, r.sc.target, CostModel::quadratic(), Sense::minimize);
  r.sol = solve_two_marginal(r.p);
  AtomicCounterexampleReport& a = r.report;
  a.grid = grid;
  a.optimum = r.sol.cert.primal;
  std::tie(a.t1, a.t2) = atomic_counterexample_plans(r.sc);
  a.cost_t1 = a.t1.objective(r.p.cost);
  a.cost_t2 = a.t2.objective(r.p.cost);
  const auto m1 = a.t1.marginal(1), m2 = a.t2.marginal(1);
  a.t1_upper = m1[0];
  a.t1_lower = m1[1];
  a.t2_upper = m2[0];
  a.t2_lower = m2[1];
  a.t1_feasible = feasible(a.t1, {r.p.a, r.p.b}, 1e-10);
  a.t2_feasible = feasible(a.t2, {r.p.a, r.p.b}, 1e-10);
  a.plan_difference = max_abs_difference(a.t1, a.t2);
  a.probe = probe_optimal_face(r.p, r.sol, probe_options(ps, ps.seed));
  return r;
}

struct PerpendicularRun {
  PerpendicularScenario sc;
  TwoMarginalProblem p;
  TwoMarginalSolution sol;
  PerpendicularCounterexampleReport report;
};

PerpendicularRun perpendicular_run(int grid, std::size_t plans, std::uint64_t seed,
                                   const ProbeSettings& ps) {
  PerpendicularRun r;
  r.sc = make_counterexample_perpendicular(grid);
  r.p = make_problem(r.sc.source, r.sc.target, CostModel::quadratic(), Sense::minimize);
  r.sol = solve_two_marginal(r.p);
  PerpendicularCounterexampleReport& q = r.report;
  q.grid = grid;
  q.plans = plans;
  for (std::size_t i = 0; i < r.sc.source.size(); ++i)
    q.separable_value += r.sc.source.weight(i) * r.sc.source.point(i)[0] * r.sc.source.point(i)[0];
  for (std::size_t j = 0; j < r.sc.target.size(); ++j)
    q.separable_value += r.sc.target.weight(j) * r.sc.target.point(j)[1] * r.sc.target.point(j)[1];
  q.min_objective = INFINITY;
  q.max_objective = -INFINITY;
  std::set<std::vector<double>> distinct;
  for (std::size_t t = 0; t < plans; ++t) {
    const TransportPlan plan = random_vertex(r.p.a, r.p.b, seed + t);
    const double obj = plan.objective(r.p.cost);
    q.min_objective = std::min(q.min_objective, obj);
    q.max_objective = std::max(q.max_objective, obj);
    q.max_separable_error = std::max(q.max_separable_error, std::abs(obj - q.separable_value));
    distinct.insert(plan.dense());
  }
  q.distinct_plans = distinct.size();
  q.probe = probe_optimal_face(r.p, r.sol, probe_options(ps, ps.seed));
  return r;
}

std::vector<CheckResult> atomic_checks(const AtomicCounterexampleReport& a) {
  std::vector<CheckResult> out;
  CheckResult f = check("atomic_plans_feasible", a.t1_feasible && a.t2_feasible);
  f.add("t1", a.t1_feasible);
  f.add("t2", a.t2_feasible);
  out.push_back(std::move(f));
  const double e1 = std::abs(a.cost_t1 - a.optimum), e2 = std::abs(a.cost_t2 - a.optimum);
  CheckResult o = check("atomic_plans_optimal", e1 <= 1e-10 && e2 <= 1e-10);
  o.add("optimum", a.optimum);
  o.add("cost_t1", a.cost_t1);
  o.add("cost_t2", a.cost_t2);
  o.add("max_err", std::max(e1, e2));
  out.push_back(std::move(o));
  CheckResult s = check("atomic_cost_symmetry", std::abs(a.cost_t1 - a.cost_t2) <= 1e-12);
  s.add("diff", std::abs(a.cost_t1 - a.cost_t2));
  out.push_back(std::move(s));
  const double half = std::max({std::abs(a.t1_upper - 0.5), std::abs(a.t1_lower - 0.5),
                                std::abs(a.t2_upper - 0.5), std::abs(a.t2_lower - 0.5)});
  CheckResult h = check("atomic_half_masses", half <= 1e-12);
  h.add("max_err", half);
  out.push_back(std::move(h));
  CheckResult d = check("atomic_plans_differ", a.plan_difference > 0.0);
  d.add("max_diff", a.plan_difference);
  out.push_back(std::move(d));
  const double exact = 4.0 / 3.0;
  CheckResult v = check("atomic_analytic_value", std::abs(a.optimum - exact) <= 1e-3);
  v.add("value", a.optimum);
  v.add("analytic", exact);
  v.add("err", std::abs(a.optimum - exact));
  v.add("grid", a.grid);
  out.push_back(std::move(v));
  out.push_back(face_nonunique(a.probe));
  return out;
}

std::vector<CheckResult> perpendicular_checks(const PerpendicularCounterexampleReport& q) {
  std::vector<CheckResult> out;
  CheckResult s = check("perpendicular_spread", q.spread() <= 1e-12);
  s.add("plans", q.plans);
  s.add("distinct", q.distinct_plans);
  s.add("spread", q.spread());
  out.push_back(std::move(s));
  CheckResult i = check("perpendicular_separable_identity", q.max_separable_error <= 1e-12);
  i.add("value", q.separable_value);
  i.add("max_err", q.max_separable_error);
  out.push_back(std::move(i));
  out.push_back(face_nonunique(q.probe));
  return out;
}

int default_grid(const CounterexampleRun& run) {
  if (run.grid > 0) return run.grid;
  return run.kind == CounterexampleKind::atomic ? 100 : 10;
}

}  // namespace

AtomicCounterexampleReport reproduce_atomic_counterexample(int grid, const ProbeSettings& probe) {
  return atomic_run(grid, probe).report;
}

PerpendicularCounterexampleReport reproduce_perpendicular_counterexample(int grid, std::size_t plans,
                                                                         std::uint64_t seed,
                                                                         const ProbeSettings& probe) {
  return perpendicular_run(grid, plans, seed, probe).report;
}

CounterexampleReport reproduce_counterexample(const CounterexampleRun& run) {
  CounterexampleReport r;
  r.kind = run.kind;
  if (run.kind == CounterexampleKind::atomic)
    r.checks = atomic_checks(reproduce_atomic_counterexample(default_grid(run), run.probe));
  else
    r.checks = perpendicular_checks(
        reproduce_perpendicular_counterexample(default_grid(run), run.plans, run.probe.seed, run.probe));
  return r;
}

CounterexampleReport reproduce_counterexample(const std::string& name) {
  CounterexampleRun run;
  run.kind = parse_counterexample(name);
  return reproduce_counterexample(run);
}

TheoremVerdict run_theorem_scenario(const CounterexampleRun& run) {
  TheoremVerdict v;
  v.expect = Expectation::counterexample;
  const int grid = default_grid(run);
  if (run.kind == CounterexampleKind::atomic) {
    v.id = TheoremId::T3_1;
    v.scenario = "cex_atomic";
    AtomicRun a = atomic_run(grid, run.probe);
    layer_hypotheses(v, a.sc);
    finish_hypotheses(v);
    solver_checks(v, a.p, a.sol);
    skip_conclusions(v, {"cp_extremality", "graph_decomposition", "layer_order", "twist",
                         "cyclical_monotonicity", "seed_agreement"});
    v.counterexample = atomic_checks(a.report);
    v.artifacts = artifacts({a.sc.source, a.sc.target}, a.sol.plan, a.sol.cert);
  } else {
    v.id = TheoremId::T3_2;
    v.scenario = "cex_perpendicular";
    PerpendicularRun q = perpendicular_run(grid, run.plans, run.probe.seed, run.probe);
    const double mdot = std::abs(dot(q.sc.source.normal(0), q.sc.target.normal(0)));
    CheckResult h = hypothesis("normals_not_perpendicular", mdot > 1e-9, v.expect);
    h.add("min_abs_dot", mdot);
    v.hypotheses.push_back(std::move(h));
    finish_hypotheses(v);
    solver_checks(v, q.p, q.sol);
    skip_conclusions(v, {"cp_extremality", "graph_decomposition", "layer_order", "twist",
                         "cyclical_monotonicity", "seed_agreement"});
    v.counterexample = perpendicular_checks(q.report);
    v.artifacts = artifacts({q.sc.source, q.sc.target}, q.sol.plan, q.sol.cert);
  }
  return v;
}

TheoremVerdict run_theorem_scenario(const ScenarioSpec& spec) {
  return std::visit([](const auto& run) { return run_theorem_scenario(run); }, spec);
}

}  // namespace layered_ot
