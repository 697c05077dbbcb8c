#include "layered_ot/multimarginal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "layered_ot/errors.hpp"

namespace layered_ot {

ReducedCost build_reduced_cost(const ThreeMarginalProblem& p, const DualCertificate& duals, int j,
                               const std::string& base_name) {
  if (j != 2) throw UsageError("build_reduced_cost: only j = 2 is supported for three marginals");
  if (duals.potentials.size() != 3) throw UsageError("build_reduced_cost: need three potentials");
  ReducedCost r;
  r.base = base_name;
  r.sense = p.sense;
  r.j = j;
  r.absorbed = {duals.potentials[2]};
  auto t = kernels::reduce_last(p.cost, duals.potentials[2], p.sense == Sense::maximize);
  r.values = std::move(t.values);
  r.witness = std::move(t.witness);
  return r;
}

TwoMarginalProblem reduced_problem(const ThreeMarginalProblem& p, const ReducedCost& c2) {
  TwoMarginalProblem q;
  q.a = p.a;
  q.b = p.b;
  q.cost = c2.values;
  q.sense = p.sense;
  return q;
}

DualCertificate reduced_certificate(const TwoMarginalProblem& p2, const DualCertificate& d3,
                                    const TransportPlan& lambda2) {
  DualCertificate d;
  d.sense = p2.sense;
  d.potentials = {d3.potentials.at(0), d3.potentials.at(1)};
  d.primal = lambda2.objective(p2.cost);
  for (std::size_t i = 0; i < p2.a.size(); ++i) d.dual += p2.a[i] * d.potentials[0][i];
  for (std::size_t j = 0; j < p2.b.size(); ++j) d.dual += p2.b[j] * d.potentials[1][j];
  d.gap = std::abs(d.primal - d.dual);
  for (std::size_t i = 0; i < p2.a.size(); ++i)
    for (std::size_t j = 0; j < p2.b.size(); ++j)
      d.max_dual_violation = std::max(
          d.max_dual_violation, -slack(p2, d, static_cast<int>(i), static_cast<int>(j)));
  return d;
}

RestrictionPair restrict_plan(const TransportPlan& lambda, int j) {
  if (lambda.arity() != 3) throw UsageError("restrict_plan needs a three-marginal plan");
  if (j != 2) throw UsageError("restrict_plan: only j = 2 is supported for three marginals");
  std::map<std::pair<int, int>, double> acc;
  for (const auto& e : lambda.entries()) acc[{e.idx[0], e.idx[1]}] += e.mass;
  std::vector<PlanEntry> entries;
  entries.reserve(acc.size());
  for (const auto& [key, m] : acc) entries.push_back({{key.first, key.second, -1}, m});
  RestrictionPair r{lambda, TransportPlan({lambda.dims()[0], lambda.dims()[1]}, std::move(entries))};
  if (std::abs(r.restricted.total_mass() - lambda.total_mass()) > 1e-9)
    throw DataError("restrict_plan: mass not preserved");
  for (std::size_t axis = 0; axis < 2; ++axis) {
    const auto a = lambda.marginal(axis), b = r.restricted.marginal(axis);
    for (std::size_t t = 0; t < a.size(); ++t)
      if (std::abs(a[t] - b[t]) > 1e-9) throw DataError("restrict_plan: marginal not preserved");
  }
  return r;
}

ProjectionReport check_projected_minimizing_set(const MinimizingSet& s3, const MinimizingSet& s2) {
  std::set<std::pair<int, int>> proj, red;
  for (const auto& t : s3.tuples) proj.insert({t[0], t[1]});
  for (const auto& t : s2.tuples) red.insert({t[0], t[1]});
  ProjectionReport r;
  r.projected_size = proj.size();
  r.reduced_size = red.size();
  std::set_difference(proj.begin(), proj.end(), red.begin(), red.end(),
                      std::back_inserter(r.only_projected));
  std::set_difference(red.begin(), red.end(), proj.begin(), proj.end(),
                      std::back_inserter(r.only_reduced));
  return r;
}

namespace {

// Union-find cycle test on a bipartite edge list (left ids and right ids are
// offset into one vertex range).
bool bipartite_acyclic(const std::vector<std::pair<int, int>>& edges, int left, int right) {
  std::vector<int> parent(static_cast<std::size_t>(left + right));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [u, v] : edges) {
    const int a = find(u), b = find(left + v);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

}  // namespace

ExtremeChainReport check_extreme_chain(const TransportPlan& lambda, const TransportPlan& lambda2) {
  if (lambda.arity() != 3 || lambda2.arity() != 2)
    throw UsageError("check_extreme_chain: need a three-marginal plan and its restriction");
  for (std::size_t d : lambda.dims())
    if (d > 5) throw CapacityError("check_extreme_chain: more than 5 points in a marginal");
  ExtremeChainReport r;
  std::vector<std::pair<int, int>> e2;
  for (const auto& e : lambda2.entries()) e2.emplace_back(e.idx[0], e.idx[1]);
  r.restricted_acyclic = bipartite_acyclic(e2, static_cast<int>(lambda2.dims()[0]),
                                           static_cast<int>(lambda2.dims()[1]));
  // Left vertices: support pairs of λ_2; right vertices: points of γ.
  std::map<std::pair<int, int>, int> pair_id;
  for (const auto& e : lambda2.entries()) pair_id.emplace(std::pair{e.idx[0], e.idx[1]}, pair_id.size());
  std::vector<std::pair<int, int>> e3;
  for (const auto& e : lambda.entries()) {
    const auto it = pair_id.find({e.idx[0], e.idx[1]});
    if (it == pair_id.end()) throw DataError("check_extreme_chain: λ_2 is not the restriction of λ");
    e3.emplace_back(it->second, e.idx[2]);
  }
  r.conditional_acyclic = bipartite_acyclic(e3, static_cast<int>(pair_id.size()),
                                            static_cast<int>(lambda.dims()[2]));
  const std::size_t n1 = lambda.dims()[0], n2 = lambda.dims()[1], n3 = lambda.dims()[2];
  std::vector<std::vector<double>> cols;
  for (const auto& e : lambda.entries()) {
    std::vector<double> c(n1 + n2 + n3, 0.0);
    c[e.idx[0]] = c[n1 + e.idx[1]] = c[n1 + n2 + e.idx[2]] = 1.0;
    cols.push_back(std::move(c));
  }
  r.direct_extreme = numerical_rank(cols, 1e-9) == cols.size();
  return r;
}

LayerCellReport count_layer_cells(const SupportMap& support, const DiscreteMeasure& y,
                                  const DiscreteMeasure& z) {
  LayerCellReport r;
  const int n3 = static_cast<int>(z.size());
  for (std::size_t i = 0; i < support.sources; ++i) {
    const auto& F = support.partners[i];
    r.max_partners = std::max(r.max_partners, F.size());
    std::map<std::pair<int, int>, std::size_t> cells;
    for (int f : F) ++cells[{y.tag(f / n3), z.tag(f % n3)}];
    std::size_t worst = 0;
    for (const auto& [cell, c] : cells) worst = std::max(worst, c);
    r.max_per_cell = std::max(r.max_per_cell, worst);
    if (worst > 1) r.offenders.push_back(static_cast<int>(i));
  }
  return r;
}

}  // namespace layered_ot
