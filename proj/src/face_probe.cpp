#include <cmath>
#include <random>
#include <string>

#include "dense_simplex.hpp"
#include "layered_ot/errors.hpp"
#include "layered_ot/solver.hpp"
#include "transport_simplex.hpp"

namespace layered_ot {

namespace {

std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), 0x5eedu};
  return std::mt19937_64(seq);
}

// Rank of witness-minus-incumbent differences over the face cells.
void summarize(FaceProbe& fp, const TransportPlan& incumbent, const std::vector<std::size_t>& cells,
               double tol_plan) {
  const std::vector<double> base = incumbent.dense();
  std::vector<std::vector<double>> rows;
  for (std::size_t w = 1; w < fp.witnesses.size(); ++w) {
    const std::vector<double> d = fp.witnesses[w].dense();
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      row[c] = d[cells[c]] - base[cells[c]];
      fp.max_deviation = std::max(fp.max_deviation, std::abs(row[c]));
    }
    rows.push_back(std::move(row));
  }
  fp.face_dimension_lb = static_cast<int>(numerical_rank(std::move(rows), tol_plan));
}

template <class Body>
void run_trials(int trials, bool parallel, Body body) {
  std::string error;
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < trials; ++t) {
      try {
        body(t);
      } catch (const std::exception& e) {
#pragma omp critical(face_probe_error)
        if (error.empty()) error = e.what();
      }
    }
  } else {
    for (int t = 0; t < trials; ++t) body(t);
  }
  if (!error.empty()) throw SolverError("face probe: " + error);
}

}  // namespace

FaceProbe probe_optimal_face(const TwoMarginalProblem& p, const TwoMarginalSolution& s,
                             const FaceProbeOptions& o) {
  const std::size_t m = p.a.size(), n = p.b.size();
  FaceProbe fp;
  fp.optimal_value = s.cert.primal;
  std::vector<char> allowed(m * n, 0);
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < m * n; ++c)
    if (slack(p, s.cert, static_cast<int>(c / n), static_cast<int>(c % n)) <= o.tol_face) {
      allowed[c] = 1;
      cells.push_back(c);
    }
  for (int c : s.basis) allowed[c] = 1;
  fp.face_cells = cells.size();

  std::vector<double> b = p.b;
  double sa = 0.0, sb = 0.0;
  for (double v : p.a) sa += v;
  for (double v : b) sb += v;
  for (double& v : b) v *= sa / sb;

  fp.witnesses.assign(static_cast<std::size_t>(o.trials) + 1, TransportPlan{});
  fp.witnesses[0] = s.plan;
  run_trials(o.trials, o.parallel, [&](int t) {
    std::mt19937_64 rng = trial_rng(o.seed, t);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> cost(m * n, 0.0);
    for (std::size_t c = 0; c < m * n; ++c)
      if (allowed[c]) cost[c] = u(rng);
    detail::TransportSimplex ts(p.a, b, cost);
    ts.set_allowed(allowed);
    ts.init_basis(s.basis);
    ts.solve(50 * m * n + 10000);
    std::vector<PlanEntry> entries;
    for (int cell : ts.basis())
      if (ts.flow(cell) > 0.0)
        entries.push_back({{cell / static_cast<int>(n), cell % static_cast<int>(n), -1}, ts.flow(cell)});
    fp.witnesses[t + 1] = TransportPlan({m, n}, std::move(entries));
  });
  const double budget = o.tol_face * (1.0 + std::abs(fp.optimal_value));
  for (std::size_t w = 1; w < fp.witnesses.size(); ++w) {
    try {
      fp.witnesses[w].check_feasible({p.a, p.b});
    } catch (const DataError&) {
      fp.witnesses_optimal = false;
    }
    const double v = fp.witnesses[w].objective(p.cost);
    const double excess = p.sense == Sense::minimize ? v - fp.optimal_value : fp.optimal_value - v;
    if (excess > budget) fp.witnesses_optimal = false;
  }
  summarize(fp, s.plan, cells, o.tol_plan);
  return fp;
}

FaceProbe probe_optimal_face(const ThreeMarginalProblem& p, const ThreeMarginalSolution& s,
                             const FaceProbeOptions& o) {
  const std::size_t n1 = p.a.size(), n2 = p.b.size(), n3 = p.c.size();
  FaceProbe fp;
  fp.optimal_value = s.cert.primal;
  std::vector<Index3> face;
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t k = 0; k < n3; ++k)
        if (slack(p, s.cert, static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)) <=
            o.tol_face) {
          face.push_back({static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)});
          cells.push_back((i * n2 + j) * n3 + k);
        }
  fp.face_cells = cells.size();
  const std::size_t rows = n1 + (n2 - 1) + (n3 - 1);
  std::vector<std::vector<int>> columns;
  for (const Index3& t : face) {
    std::vector<int> col{t[0]};
    if (static_cast<std::size_t>(t[1]) < n2 - 1) col.push_back(static_cast<int>(n1) + t[1]);
    if (static_cast<std::size_t>(t[2]) < n3 - 1) col.push_back(static_cast<int>(n1 + n2 - 1) + t[2]);
    columns.push_back(std::move(col));
  }
  std::vector<double> rhs(p.a.begin(), p.a.end());
  rhs.insert(rhs.end(), p.b.begin(), p.b.end() - 1);
  rhs.insert(rhs.end(), p.c.begin(), p.c.end() - 1);

  fp.witnesses.assign(static_cast<std::size_t>(o.trials) + 1, TransportPlan{});
  fp.witnesses[0] = s.plan;
  run_trials(o.trials, o.parallel, [&](int t) {
    std::mt19937_64 rng = trial_rng(o.seed, t);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> cost(face.size());
    for (double& c : cost) c = u(rng);
    detail::DenseSimplex ds(rows, columns, rhs, cost);
    ds.solve();
    std::vector<PlanEntry> entries;
    for (std::size_t c = 0; c < face.size(); ++c)
      if (ds.x()[c] > 0.0) entries.push_back({face[c], ds.x()[c]});
    fp.witnesses[t + 1] = TransportPlan({n1, n2, n3}, std::move(entries));
  });
  const double budget = o.tol_face * (1.0 + std::abs(fp.optimal_value));
  for (std::size_t w = 1; w < fp.witnesses.size(); ++w) {
    try {
      fp.witnesses[w].check_feasible({p.a, p.b, p.c});
    } catch (const DataError&) {
      fp.witnesses_optimal = false;
    }
    const double v = fp.witnesses[w].objective(p.cost);
    const double excess = p.sense == Sense::minimize ? v - fp.optimal_value : fp.optimal_value - v;
    if (excess > budget) fp.witnesses_optimal = false;
  }
  summarize(fp, s.plan, cells, o.tol_plan);
  return fp;
}

}  // namespace layered_ot
