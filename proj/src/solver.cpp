#include "layered_ot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dense_simplex.hpp"
#include "layered_ot/errors.hpp"
#include "transport_simplex.hpp"

namespace layered_ot {

namespace {

bool index_less(const Index3& a, const Index3& b) { return a < b; }

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void check_weights(const std::vector<double>& w, const char* what) {
  if (w.empty()) throw UsageError(std::string(what) + ": empty marginal");
  for (double x : w)
    if (!(x >= 0.0) || !std::isfinite(x)) throw UsageError(std::string(what) + ": negative weight");
  if (std::abs(sum(w) - 1.0) > 1e-9) throw UsageError(std::string(what) + ": marginal not normalized");
}

}  // namespace

TransportPlan::TransportPlan(std::vector<std::size_t> dims, std::vector<PlanEntry> entries)
    : dims_(std::move(dims)) {
  if (dims_.size() != 2 && dims_.size() != 3) throw UsageError("plan arity must be 2 or 3");
  for (PlanEntry& e : entries) {
    if (dims_.size() == 2) e.idx[2] = -1;
    for (std::size_t a = 0; a < dims_.size(); ++a)
      if (e.idx[a] < 0 || static_cast<std::size_t>(e.idx[a]) >= dims_[a])
        throw UsageError("plan entry index out of range");
  }
  std::sort(entries.begin(), entries.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return index_less(a.idx, b.idx); });
  for (const PlanEntry& e : entries) {
    if (!entries_.empty() && entries_.back().idx == e.idx) entries_.back().mass += e.mass;
    else entries_.push_back(e);
  }
  std::erase_if(entries_, [](const PlanEntry& e) { return e.mass == 0.0; });
}

double TransportPlan::mass(int i, int j, int k) const {
  const Index3 key{i, j, arity() == 2 ? -1 : k};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const PlanEntry& e, const Index3& x) { return e.idx < x; });
  return it != entries_.end() && it->idx == key ? it->mass : 0.0;
}

double TransportPlan::total_mass() const {
  double s = 0.0;
  for (const PlanEntry& e : entries_) s += e.mass;
  return s;
}

std::vector<double> TransportPlan::marginal(std::size_t axis) const {
  if (axis >= arity()) throw UsageError("plan marginal axis out of range");
  std::vector<double> m(dims_[axis], 0.0);
  for (const PlanEntry& e : entries_) m[e.idx[axis]] += e.mass;
  return m;
}

double TransportPlan::objective(const CostMatrix& c) const {
  if (arity() != 2 || c.rows != dims_[0] || c.cols != dims_[1])
    throw UsageError("plan/cost shape mismatch");
  double s = 0.0;
  for (const PlanEntry& e : entries_) s += e.mass * c(e.idx[0], e.idx[1]);
  return s;
}

double TransportPlan::objective(const CostTensor& c) const {
  if (arity() != 3 || c.n1 != dims_[0] || c.n2 != dims_[1] || c.n3 != dims_[2])
    throw UsageError("plan/cost shape mismatch");
  double s = 0.0;
  for (const PlanEntry& e : entries_) s += e.mass * c(e.idx[0], e.idx[1], e.idx[2]);
  return s;
}

std::vector<double> TransportPlan::dense() const {
  std::size_t total = 1;
  for (std::size_t d : dims_) total *= d;
  std::vector<double> out(total, 0.0);
  for (const PlanEntry& e : entries_) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < arity(); ++a) flat = flat * dims_[a] + e.idx[a];
    out[flat] = e.mass;
  }
  return out;
}

void TransportPlan::check_feasible(const std::vector<std::vector<double>>& weights, double tol) const {
  if (weights.size() != arity()) throw UsageError("check_feasible: wrong number of marginals");
  for (const PlanEntry& e : entries_)
    if (e.mass < 0.0) throw DataError("plan has a negative mass");
  if (std::abs(total_mass() - 1.0) > tol) throw DataError("plan total mass differs from 1");
  for (std::size_t a = 0; a < arity(); ++a) {
    const std::vector<double> m = marginal(a);
    if (weights[a].size() != m.size()) throw DataError("marginal size mismatch");
    for (std::size_t i = 0; i < m.size(); ++i)
      if (std::abs(m[i] - weights[a][i]) > tol)
        throw DataError("plan marginal " + std::to_string(a) + " deviates at index " +
                        std::to_string(i));
  }
}

TwoMarginalProblem make_problem(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const CostModel& model, Sense sense) {
  if (model.arity() != 2) throw UsageError("two-marginal problem needs a two-point cost");
  TwoMarginalProblem p;
  p.a = mu.weights();
  p.b = nu.weights();
  p.cost = kernels::tabulate_cost(model, mu, nu);
  for (double c : p.cost.data)
    if (!std::isfinite(c)) throw UsageError("cost is not finite on every pair");
  p.sense = sense;
  return p;
}

ThreeMarginalProblem make_problem(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const DiscreteMeasure& gamma, const CostModel& model, Sense sense) {
  if (model.arity() != 3) throw UsageError("three-marginal problem needs a three-point cost");
  ThreeMarginalProblem p;
  p.a = mu.weights();
  p.b = nu.weights();
  p.c = gamma.weights();
  p.cost = kernels::tabulate_cost3(model, mu, nu, gamma);
  p.sense = sense;
  return p;
}

double default_tol_s(double max_abs_cost) { return 1e-7 * (1.0 + max_abs_cost); }

double slack(const TwoMarginalProblem& p, const DualCertificate& d, int i, int j) {
  const double s = p.cost(i, j) - d.potentials[0][i] - d.potentials[1][j];
  return p.sense == Sense::minimize ? s : -s;
}

double slack(const ThreeMarginalProblem& p, const DualCertificate& d, int i, int j, int k) {
  const double s = p.cost(i, j, k) - d.potentials[0][i] - d.potentials[1][j] - d.potentials[2][k];
  return p.sense == Sense::minimize ? s : -s;
}

namespace {

double dual_value(const std::vector<std::vector<double>>& w, const DualCertificate& d) {
  double s = 0.0;
  for (std::size_t a = 0; a < w.size(); ++a)
    for (std::size_t i = 0; i < w[a].size(); ++i) s += w[a][i] * d.potentials[a][i];
  return s;
}

void finish_certificate(DualCertificate& d, const std::vector<std::vector<double>>& w,
                        double primal, double max_violation) {
  d.primal = primal;
  d.dual = dual_value(w, d);
  d.gap = std::abs(d.primal - d.dual);
  d.max_dual_violation = max_violation;
}

}  // namespace

TwoMarginalSolution solve_two_marginal(const TwoMarginalProblem& p, const SolverOptions& o) {
  check_weights(p.a, "solve_two_marginal");
  check_weights(p.b, "solve_two_marginal");
  const std::size_t m = p.a.size(), n = p.b.size();
  if (p.cost.rows != m || p.cost.cols != n) throw UsageError("cost matrix shape mismatch");
  std::vector<double> cost = p.cost.data;
  if (p.sense == Sense::maximize)
    for (double& c : cost) c = -c;
  // Balance the marginals exactly in floating point by scaling b.
  std::vector<double> b = p.b;
  const double sa = sum(p.a), sb = sum(b);
  for (double& v : b) v *= sa / sb;

  detail::TransportSimplex ts(p.a, b, cost);
  ts.init_least_cost();
  ts.solve(o.max_pivots ? o.max_pivots : 50 * m * n + 10000);

  TwoMarginalSolution sol;
  sol.pivots = ts.pivots();
  sol.basis = ts.basis();
  std::sort(sol.basis.begin(), sol.basis.end());
  std::vector<PlanEntry> entries;
  for (int cell : sol.basis)
    if (ts.flow(cell) > 0.0)
      entries.push_back({{cell / static_cast<int>(n), cell % static_cast<int>(n), -1}, ts.flow(cell)});
  sol.plan = TransportPlan({m, n}, std::move(entries));

  std::vector<double> phi = ts.row_potentials(), psi = ts.col_potentials();
  if (p.sense == Sense::maximize) {
    for (double& v : phi) v = -v;
    for (double& v : psi) v = -v;
  }
  const int i0 = sol.plan.entries().empty() ? 0 : sol.plan.entries().front().idx[0];
  const double shift = phi[i0];
  for (double& v : phi) v -= shift;
  for (double& v : psi) v += shift;
  sol.cert.sense = p.sense;
  sol.cert.potentials = {std::move(phi), std::move(psi)};
  double viol = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      viol = std::max(viol, -slack(p, sol.cert, static_cast<int>(i), static_cast<int>(j)));
  finish_certificate(sol.cert, {p.a, p.b}, sol.plan.objective(p.cost), viol);
  if (o.require_certificate && sol.cert.gap > 1e-8 * (1.0 + std::abs(sol.cert.primal)))
    throw SolverError("two-marginal solve: duality gap " + std::to_string(sol.cert.gap) +
                      " exceeds tolerance after " + std::to_string(sol.pivots) + " pivots");
  return sol;
}

TwoMarginalSolution solve_two_marginal(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const CostModel& model, Sense sense, const SolverOptions& o) {
  return solve_two_marginal(make_problem(mu, nu, model, sense), o);
}

namespace {

struct ThreeLp {
  std::size_t rows = 0;
  std::vector<std::vector<int>> columns;
  std::vector<double> rhs;
};

// Row layout: all n1 rows of marginal 1, the first n2-1 of marginal 2 and
// the first n3-1 of marginal 3 (the dropped rows are implied by mass).
ThreeLp three_lp(const ThreeMarginalProblem& p, const std::vector<Index3>& cells) {
  const std::size_t n1 = p.a.size(), n2 = p.b.size(), n3 = p.c.size();
  ThreeLp lp;
  lp.rows = n1 + (n2 - 1) + (n3 - 1);
  lp.rhs.reserve(lp.rows);
  lp.rhs.insert(lp.rhs.end(), p.a.begin(), p.a.end());
  lp.rhs.insert(lp.rhs.end(), p.b.begin(), p.b.end() - 1);
  lp.rhs.insert(lp.rhs.end(), p.c.begin(), p.c.end() - 1);
  for (const Index3& t : cells) {
    std::vector<int> col{t[0]};
    if (static_cast<std::size_t>(t[1]) < n2 - 1) col.push_back(static_cast<int>(n1) + t[1]);
    if (static_cast<std::size_t>(t[2]) < n3 - 1)
      col.push_back(static_cast<int>(n1 + n2 - 1) + t[2]);
    lp.columns.push_back(std::move(col));
  }
  return lp;
}

}  // namespace

ThreeMarginalSolution solve_three_marginal(const ThreeMarginalProblem& p, const SolverOptions& o) {
  check_weights(p.a, "solve_three_marginal");
  check_weights(p.b, "solve_three_marginal");
  check_weights(p.c, "solve_three_marginal");
  const std::size_t n1 = p.a.size(), n2 = p.b.size(), n3 = p.c.size();
  if (p.cost.n1 != n1 || p.cost.n2 != n2 || p.cost.n3 != n3)
    throw UsageError("cost tensor shape mismatch");
  if (n1 * n2 * n3 > o.max_cells3)
    throw CapacityError("three-marginal instance has " + std::to_string(n1 * n2 * n3) +
                        " cells, cap is " + std::to_string(o.max_cells3));
  std::vector<Index3> cells;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t k = 0; k < n3; ++k)
        cells.push_back({static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)});
  ThreeLp lp = three_lp(p, cells);
  std::vector<double> cost = p.cost.data;
  if (p.sense == Sense::maximize)
    for (double& c : cost) c = -c;
  detail::DenseSimplex ds(lp.rows, std::move(lp.columns), std::move(lp.rhs), cost);
  ds.solve(o.max_pivots);

  ThreeMarginalSolution sol;
  sol.pivots = ds.pivots();
  std::vector<PlanEntry> entries;
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (ds.x()[c] > 0.0) entries.push_back({cells[c], ds.x()[c]});
  sol.plan = TransportPlan({n1, n2, n3}, std::move(entries));

  const std::vector<double>& y = ds.duals();
  std::vector<double> p1(y.begin(), y.begin() + static_cast<long>(n1));
  std::vector<double> p2(y.begin() + static_cast<long>(n1), y.begin() + static_cast<long>(n1 + n2 - 1));
  std::vector<double> p3(y.begin() + static_cast<long>(n1 + n2 - 1), y.end());
  p2.push_back(0.0);
  p3.push_back(0.0);
  if (p.sense == Sense::maximize)
    for (auto* v : {&p1, &p2, &p3})
      for (double& x : *v) x = -x;
  const Index3 first = sol.plan.entries().empty() ? Index3{0, 0, 0} : sol.plan.entries().front().idx;
  const double s1 = p1[first[0]], s2 = p2[first[1]];
  for (double& v : p1) v -= s1;
  for (double& v : p2) v -= s2;
  for (double& v : p3) v += s1 + s2;
  sol.cert.sense = p.sense;
  sol.cert.potentials = {std::move(p1), std::move(p2), std::move(p3)};
  double viol = 0.0;
  for (const Index3& t : cells) viol = std::max(viol, -slack(p, sol.cert, t[0], t[1], t[2]));
  finish_certificate(sol.cert, {p.a, p.b, p.c}, sol.plan.objective(p.cost), viol);
  if (o.require_certificate && sol.cert.gap > 1e-8 * (1.0 + std::abs(sol.cert.primal)))
    throw SolverError("three-marginal solve: duality gap " + std::to_string(sol.cert.gap) +
                      " exceeds tolerance");
  return sol;
}

ThreeMarginalSolution solve_three_marginal(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                           const DiscreteMeasure& gamma, const CostModel& model,
                                           Sense sense, const SolverOptions& o) {
  const std::size_t cells = mu.size() * nu.size() * gamma.size();
  if (cells > o.max_cells3)
    throw CapacityError("three-marginal instance has " + std::to_string(cells) +
                        " cells, cap is " + std::to_string(o.max_cells3));
  return solve_three_marginal(make_problem(mu, nu, gamma, model, sense), o);
}

bool MinimizingSet::contains(int i, int j, int k) const {
  const Index3 key{i, j, arity == 2 ? -1 : k};
  return std::binary_search(tuples.begin(), tuples.end(), key);
}

MinimizingSet minimizing_set(const TwoMarginalProblem& p, const DualCertificate& d, double tol) {
  MinimizingSet s;
  s.arity = 2;
  s.tol = tol;
  for (std::size_t i = 0; i < p.a.size(); ++i)
    for (std::size_t j = 0; j < p.b.size(); ++j)
      if (slack(p, d, static_cast<int>(i), static_cast<int>(j)) <= tol)
        s.tuples.push_back({static_cast<int>(i), static_cast<int>(j), -1});
  return s;
}

MinimizingSet minimizing_set(const ThreeMarginalProblem& p, const DualCertificate& d, double tol) {
  MinimizingSet s;
  s.arity = 3;
  s.tol = tol;
  for (std::size_t i = 0; i < p.a.size(); ++i)
    for (std::size_t j = 0; j < p.b.size(); ++j)
      for (std::size_t k = 0; k < p.c.size(); ++k)
        if (slack(p, d, static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)) <= tol)
          s.tuples.push_back({static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)});
  return s;
}

namespace {

template <class Problem, class SlackFn>
DualityCheck duality_common(const Problem& p, const TransportPlan& plan, const DualCertificate& d,
                            double tol_s, const std::vector<std::vector<double>>& w, double primal,
                            double max_violation, SlackFn slack_of) {
  (void)p;
  DualityCheck c;
  const double dual = dual_value(w, d);
  c.gap = std::abs(primal - dual);
  c.gap_tol = 1e-8 * (1.0 + std::abs(primal));
  c.max_dual_violation = max_violation;
  for (const PlanEntry& e : plan.entries())
    if (slack_of(e.idx) > tol_s) ++c.support_outside_s;
  c.ok = c.gap <= c.gap_tol && c.support_outside_s == 0 && c.max_dual_violation <= 1e-9;
  return c;
}

}  // namespace

DualityCheck check_duality(const TwoMarginalProblem& p, const TransportPlan& plan,
                           const DualCertificate& d, double tol_s) {
  double viol = 0.0;
  for (std::size_t i = 0; i < p.a.size(); ++i)
    for (std::size_t j = 0; j < p.b.size(); ++j)
      viol = std::max(viol, -slack(p, d, static_cast<int>(i), static_cast<int>(j)));
  return duality_common(p, plan, d, tol_s, {p.a, p.b}, plan.objective(p.cost), viol,
                        [&](const Index3& t) { return slack(p, d, t[0], t[1]); });
}

DualityCheck check_duality(const ThreeMarginalProblem& p, const TransportPlan& plan,
                           const DualCertificate& d, double tol_s) {
  double viol = 0.0;
  for (std::size_t i = 0; i < p.a.size(); ++i)
    for (std::size_t j = 0; j < p.b.size(); ++j)
      for (std::size_t k = 0; k < p.c.size(); ++k)
        viol = std::max(viol, -slack(p, d, static_cast<int>(i), static_cast<int>(j),
                                     static_cast<int>(k)));
  return duality_common(p, plan, d, tol_s, {p.a, p.b, p.c}, plan.objective(p.cost), viol,
                        [&](const Index3& t) { return slack(p, d, t[0], t[1], t[2]); });
}

bool support_is_acyclic(const TransportPlan& plan) {
  if (plan.arity() != 2) throw UsageError("support_is_acyclic needs a two-marginal plan");
  const std::size_t m = plan.dims()[0], n = plan.dims()[1];
  std::vector<int> parent(m + n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const PlanEntry& e : plan.entries()) {
    const int a = find(e.idx[0]), b = find(static_cast<int>(m) + e.idx[1]);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

TransportPlan random_vertex(const std::vector<double>& a, const std::vector<double>& b,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TwoMarginalProblem p;
  p.a = a;
  p.b = b;
  p.cost = CostMatrix(a.size(), b.size());
  for (double& c : p.cost.data) c = u(rng);
  return solve_two_marginal(p).plan;
}

}  // namespace layered_ot
