#include "layered_ot/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "layered_ot/errors.hpp"

namespace layered_ot {

std::size_t SupportMap::max_partners() const {
  std::size_t m = 0;
  for (const auto& p : partners) m = std::max(m, p.size());
  return m;
}

std::size_t SupportMap::pair_count() const {
  std::size_t s = 0;
  for (const auto& p : partners) s += p.size();
  return s;
}

std::vector<std::pair<int, int>> SupportMap::pairs() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(pair_count());
  for (std::size_t i = 0; i < partners.size(); ++i)
    for (int j : partners[i]) out.emplace_back(static_cast<int>(i), j);
  return out;
}

SupportMap build_support_map(const TransportPlan& plan, double tol_support,
                             const DiscreteMeasure* target, const LayeredSpace* space) {
  SupportMap s;
  s.tol_support = tol_support;
  const auto& dims = plan.dims();
  s.sources = dims.at(0);
  s.targets = plan.arity() == 3 ? dims[1] * dims[2] : dims.at(1);
  s.partners.assign(s.sources, {});
  s.mass.assign(s.sources, {});
  for (const auto& e : plan.entries()) {
    if (e.mass <= tol_support) {
      s.dropped_mass += e.mass;
      ++s.dropped_pairs;
      continue;
    }
    const int j = plan.arity() == 3 ? e.idx[1] * static_cast<int>(dims[2]) + e.idx[2] : e.idx[1];
    s.partners[e.idx[0]].push_back(j);
    s.mass[e.idx[0]].push_back(e.mass);
  }
  const bool by_layer = target && space && plan.arity() == 2;
  for (std::size_t i = 0; i < s.sources; ++i) {
    std::vector<std::size_t> order(s.partners[i].size());
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](std::size_t t) {
      const int j = s.partners[i][t];
      const int rank = by_layer && target->tag(j) >= 0 ? space->rank_of(target->tag(j)) : -1;
      return std::pair{rank, j};
    };
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return key(a) < key(b); });
    std::vector<int> p;
    std::vector<double> m;
    for (auto t : order) {
      p.push_back(s.partners[i][t]);
      m.push_back(s.mass[i][t]);
    }
    s.partners[i] = std::move(p);
    s.mass[i] = std::move(m);
  }
  return s;
}

SupportMap support_from_minimizing_set(const MinimizingSet& set, std::size_t sources,
                                       std::size_t targets) {
  SupportMap s;
  s.sources = sources;
  s.targets = targets;
  s.tol_support = set.tol;
  s.partners.assign(sources, {});
  s.mass.assign(sources, {});
  for (const auto& t : set.tuples) {
    s.partners[t[0]].push_back(t[1]);
    s.mass[t[0]].push_back(0.0);
  }
  return s;
}

std::vector<KappaFP> kappa_and_fP(const SupportMap& support, const DiscreteMeasure& target,
                                  const LayeredSpace& space, const CostMatrix& cost) {
  std::vector<KappaFP> out(support.sources);
  for (std::size_t i = 0; i < support.sources; ++i) {
    const auto& F = support.partners[i];
    if (F.empty()) continue;
    KappaFP& r = out[i];
    for (int j : F) {
      if (target.tag(j) < 0) {
        std::ostringstream os;
        os << "kappa_and_fP: partner " << j << " of source " << i << " has no layer tag";
        throw DataError(os.str());
      }
      const int rank = space.rank_of(target.tag(j));
      if (r.kappa_rank < 0 || rank < r.kappa_rank) r.kappa_rank = rank;
    }
    r.kappa_layer = space.partition_order()[r.kappa_rank];
    double best = -INFINITY;
    for (int j : F)
      if (space.rank_of(target.tag(j)) == r.kappa_rank) best = std::max(best, cost(i, j));
    const double tie = 1e-10 * (1.0 + std::abs(best));
    for (int j : F)
      if (space.rank_of(target.tag(j)) == r.kappa_rank && cost(i, j) >= best - tie)
        r.f_p.push_back(j);
  }
  return out;
}

std::size_t count_layer_order_violations(const SupportMap& support,
                                         const std::vector<KappaFP>& kfp,
                                         const DiscreteMeasure& target, const LayeredSpace& space) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < support.sources; ++i) {
    if (kfp[i].f_p.empty()) continue;
    const int a = space.rank_of(target.tag(kfp[i].f_p.front()));
    for (int j : support.partners[i])
      if (space.rank_of(target.tag(j)) < a) ++bad;
  }
  return bad;
}

ExtremalityReport check_cP_extremality(const SupportMap& support, const std::vector<KappaFP>& kfp,
                                       const DiscreteMeasure& source, const DiscreteMeasure& target,
                                       std::vector<char> M, std::vector<char> N,
                                       std::size_t max_listed) {
  ExtremalityReport r;
  if (M.empty()) {
    M.assign(support.sources, 0);
    for (std::size_t i = 0; i < support.sources; ++i)
      M[i] = source.weight(i) > 0.0 && !source.is_atom(i);
  }
  if (N.empty()) {
    N.assign(support.targets, 0);
    for (std::size_t j = 0; j < support.targets; ++j) N[j] = !target.is_atom(j);
  }
  for (std::size_t i = 0; i < support.sources; ++i) {
    if (!M[i]) continue;
    if (!support.partners[i].empty() && kfp[i].f_p.empty()) r.condition1_holds = false;
    if (kfp[i].multi_valued()) ++r.multi_valued_fp;
  }
  // C(y*): sources in M with y* in F(i) and some designated y in f_P(i) other than y*.
  std::vector<std::vector<int>> C(support.targets);
  for (std::size_t i = 0; i < support.sources; ++i) {
    if (!M[i]) continue;
    const auto& fp = kfp[i].f_p;
    for (int y : support.partners[i]) {
      if (!N[y]) continue;
      const bool other = std::any_of(fp.begin(), fp.end(), [&](int d) { return d != y; });
      if (other) C[y].push_back(static_cast<int>(i));
    }
  }
  for (std::size_t y = 0; y < support.targets; ++y) {
    const std::size_t c = C[y].size();
    r.violation_count += c * (c - (c > 0 ? 1 : 0)) / 2;
    for (std::size_t a = 0; a < c && r.violating_pairs.size() < max_listed; ++a)
      for (std::size_t b = a + 1; b < c && r.violating_pairs.size() < max_listed; ++b)
        r.violating_pairs.push_back({C[y][a], C[y][b], static_cast<int>(y)});
  }
  return r;
}

namespace {

bool twist_match(const Point& diff, const Point& g0, const DiscreteMeasure& sources, int i0,
                 double tol) {
  if (norm(diff) <= tol * (1.0 + norm(g0))) return true;
  return sources.has_normal(i0) && sine_to_line(diff, sources.normal(i0)) <= tol;
}

}  // namespace

TwistReport count_twist(const DiscreteMeasure& sources, const DiscreteMeasure& targets,
                        const CostModel& model, double tol_col, std::size_t samples,
                        std::uint64_t seed) {
  TwistReport r;
  r.tol_col = tol_col;
  if (sources.size() == 0 || targets.size() == 0) return r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pi(0, sources.size() - 1), pj(0, targets.size() - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const int i0 = static_cast<int>(pi(rng)), j0 = static_cast<int>(pj(rng));
    try {
      const Point& x0 = sources.point(i0);
      const Point g0 = model.grad2(x0, targets.point(j0));
      std::size_t count = 0;
      for (std::size_t j = 0; j < targets.size(); ++j) {
        const Point diff = sub(model.grad2(x0, targets.point(j)), g0);
        if (twist_match(diff, g0, sources, i0, tol_col)) ++count;
      }
      r.samples.push_back({i0, j0, count});
      r.max_count = std::max(r.max_count, count);
    } catch (const DomainError&) {
      ++r.skipped;
    }
  }
  return r;
}

TwistReport count_twist3(const SupportMap& support, const DiscreteMeasure& sources,
                         const DiscreteMeasure& y, const DiscreteMeasure& z, const CostModel& model,
                         double tol_col, std::size_t samples, std::uint64_t seed) {
  TwistReport r;
  r.tol_col = tol_col;
  std::vector<int> charged;
  for (std::size_t i = 0; i < support.sources; ++i)
    if (!support.partners[i].empty()) charged.push_back(static_cast<int>(i));
  if (charged.empty()) return r;
  const int n3 = static_cast<int>(z.size());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pc(0, charged.size() - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const int i0 = charged[pc(rng)];
    const auto& F = support.partners[i0];
    std::uniform_int_distribution<std::size_t> pf(0, F.size() - 1);
    const int f0 = F[pf(rng)];
    const Point& x0 = sources.point(i0);
    const Point g0 = model.grad3(x0, y.point(f0 / n3), z.point(f0 % n3));
    std::size_t count = 0;
    for (int f : F) {
      const Point diff = sub(model.grad3(x0, y.point(f / n3), z.point(f % n3)), g0);
      if (twist_match(diff, g0, sources, i0, tol_col)) ++count;
    }
    r.samples.push_back({i0, f0, count});
    r.max_count = std::max(r.max_count, count);
  }
  return r;
}

GraphDecomposition decompose_graphs(const TransportPlan& plan, const DiscreteMeasure& target,
                                    const LayeredSpace& space, const DiscreteMeasure& mu,
                                    double tol_support) {
  if (plan.arity() != 2) throw UsageError("decompose_graphs needs a two-marginal plan");
  const SupportMap s = build_support_map(plan, tol_support, &target, &space);
  GraphDecomposition g;
  g.K = space.size();
  g.maps.assign(g.K, std::vector<int>(s.sources, -1));
  g.alpha.assign(g.K, std::vector<double>(s.sources, 0.0));
  g.layer_of_map = space.partition_order();
  g.residual = s.dropped_mass;
  std::vector<int> offenders;
  for (std::size_t i = 0; i < s.sources; ++i) {
    bool bad = false;
    for (std::size_t t = 0; t < s.partners[i].size(); ++t) {
      const int j = s.partners[i][t];
      if (target.tag(j) < 0) throw DataError("decompose_graphs: untagged target " + std::to_string(j));
      const auto k = static_cast<std::size_t>(space.rank_of(target.tag(j)));
      if (g.maps[k][i] >= 0) bad = true;
      g.maps[k][i] = j;
      g.alpha[k][i] = mu.weight(i) > 0.0 ? s.mass[i][t] / mu.weight(i) : 0.0;
    }
    if (bad) offenders.push_back(static_cast<int>(i));
  }
  if (!offenders.empty()) {
    std::ostringstream os;
    os << "decompose_graphs: " << offenders.size()
       << " source(s) with two partners in one layer:";
    for (std::size_t t = 0; t < offenders.size() && t < 20; ++t) os << ' ' << offenders[t];
    throw StructureViolation(os.str());
  }
  for (std::size_t i = 0; i < s.sources; ++i) {
    if (mu.weight(i) <= 0.0) continue;
    double sum = 0.0;
    for (std::size_t k = 0; k < g.K; ++k) sum += g.alpha[k][i];
    g.max_alpha_sum_error = std::max(g.max_alpha_sum_error, std::abs(sum - 1.0));
  }
  return g;
}

TransportPlan reconstruct_plan(const GraphDecomposition& g, const DiscreteMeasure& mu,
                               std::size_t targets) {
  std::vector<PlanEntry> entries;
  for (std::size_t k = 0; k < g.K; ++k)
    for (std::size_t i = 0; i < g.maps[k].size(); ++i)
      if (g.maps[k][i] >= 0)
        entries.push_back({{static_cast<int>(i), g.maps[k][i], -1}, g.alpha[k][i] * mu.weight(i)});
  return TransportPlan({mu.size(), targets}, std::move(entries));
}

CyclicalMonotonicityReport check_cyclical_monotonicity(const SupportMap& support,
                                                       const CostMatrix& cost, Sense sense,
                                                       std::size_t cycle_len_max,
                                                       std::size_t samples, std::uint64_t seed) {
  constexpr double tol = 1e-9;
  CyclicalMonotonicityReport r;
  const bool maximize = sense == Sense::maximize;
  const auto scan = kernels::scan_two_cycles(cost, support.pairs(), maximize, tol);
  r.two_cycles_checked = scan.checked;
  r.two_cycle_violations = scan.violations;
  r.worst_two_cycle = scan.worst;

  std::vector<int> charged;
  for (std::size_t i = 0; i < support.sources; ++i)
    if (!support.partners[i].empty()) charged.push_back(static_cast<int>(i));
  const std::size_t lmax = std::min(cycle_len_max, charged.size());
  if (lmax < 3) return r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> plen(3, lmax);
  std::vector<int> pool = charged;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t L = plen(rng);
    for (std::size_t t = 0; t < L; ++t) {
      std::uniform_int_distribution<std::size_t> pick(t, pool.size() - 1);
      std::swap(pool[t], pool[pick(rng)]);
    }
    std::vector<int> ys(L);
    for (std::size_t t = 0; t < L; ++t) {
      const auto& F = support.partners[pool[t]];
      std::uniform_int_distribution<std::size_t> pf(0, F.size() - 1);
      ys[t] = F[pf(rng)];
    }
    double on = 0.0, shifted = 0.0;
    for (std::size_t t = 0; t < L; ++t) {
      on += cost(pool[t], ys[t]);
      shifted += cost(pool[t], ys[(t + 1) % L]);
    }
    const double excess = maximize ? shifted - on : on - shifted;
    ++r.sampled_cycles;
    r.worst_sampled = std::max(r.worst_sampled, excess);
    if (excess > tol) ++r.sampled_violations;
  }
  return r;
}

BoundaryNormalReport check_boundary_normal_lines(const TransportPlan& plan,
                                                 const MixedScenario& scenario,
                                                 const DiscreteMeasure& target, double tol,
                                                 double tol_support) {
  const SupportMap s = build_support_map(plan, tol_support);
  BoundaryNormalReport r;
  for (std::size_t i = 0; i < s.sources; ++i) {
    const auto& F = s.partners[i];
    if (F.empty()) continue;
    if (scenario.region[i] == Region::interior) {
      ++r.interior_sources;
      if (F.size() == 1)
        ++r.interior_single;
      else
        r.interior_flagged.push_back(static_cast<int>(i));
      continue;
    }
    ++r.boundary_sources;
    if (F.size() < 2) continue;
    ++r.boundary_multi;
    double worst = 0.0;
    for (std::size_t t = 1; t < F.size(); ++t) {
      const Point d = sub(target.point(F[t]), target.point(F[0]));
      worst = std::max(worst, sine_to_line(d, scenario.boundary_normal[i]));
    }
    r.worst_sine = std::max(r.worst_sine, worst);
    if (worst > tol) r.boundary_flagged.push_back(static_cast<int>(i));
  }
  return r;
}

std::size_t count_critical_points(const GapProfile& profile, const CriticalPointOptions& o) {
  const auto& t = profile.tangential;
  const std::size_t n = t.size();
  if (n == 0) return 0;
  double scale = 0.0;
  for (double v : t) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return n;
  std::vector<int> sign(n);
  for (std::size_t k = 0; k < n; ++k)
    sign[k] = std::abs(t[k]) <= o.zero_tol * scale ? 0 : (t[k] > 0 ? 1 : -1);

  std::size_t count = 0;
  if (profile.closed) {
    // Rotate so that index 0 starts a run boundary.
    std::size_t start = 0;
    while (start < n && sign[start] == 0) ++start;
    if (start == n) return 1;
    for (std::size_t s = 0; s < n; ++s) {
      const int a = sign[(start + s) % n], b = sign[(start + s + 1) % n];
      if (a != 0 && b != 0 && a != b) ++count;
      if (a != 0 && b == 0) ++count;
    }
    return count;
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const int a = sign[k], b = sign[k + 1];
    if (a != 0 && b != 0 && a != b) ++count;
    // Zero runs entered from a nonzero node, unless the run reaches the end.
    if (a != 0 && b == 0) {
      std::size_t e = k + 1;
      while (e < n && sign[e] == 0) ++e;
      if (e < n) ++count;
    }
  }
  return count + 2;
}

SubtwistReport check_subtwist_uniqueness_setup(const CostModel& model, const ManifoldChart& chart,
                                               const DiscreteMeasure& targets, std::size_t samples,
                                               std::uint64_t seed) {
  SubtwistReport r;
  const std::size_t m = targets.size();
  if (m < 2) return r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  const std::size_t all_pairs = m * (m - 1) / 2;
  auto visit = [&](std::size_t a, std::size_t b) {
    const auto prof = subtwist_gap(model, targets.point(a), targets.point(b), chart);
    const std::size_t c = count_critical_points(prof);
    ++r.pairs_checked;
    if (c > 2) ++r.pairs_above_two;
    if (c > r.max_critical || r.worst_y1 < 0) {
      r.max_critical = std::max(r.max_critical, c);
      r.worst_y1 = static_cast<int>(a);
      r.worst_y2 = static_cast<int>(b);
    }
  };
  if (samples == 0 || all_pairs <= samples) {
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) visit(a, b);
    return r;
  }
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    visit(std::min(a, b), std::max(a, b));
  }
  return r;
}

}  // namespace layered_ot
