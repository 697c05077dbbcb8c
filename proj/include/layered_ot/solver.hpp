#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "layered_ot/costs.hpp"
#include "layered_ot/kernels.hpp"
#include "layered_ot/measures.hpp"

namespace layered_ot {

enum class Sense { minimize, maximize };

/// Index tuple of a plan entry; the third slot is -1 for two-marginal plans.
using Index3 = std::array<int, 3>;

struct PlanEntry {
  Index3 idx{-1, -1, -1};
  double mass = 0.0;
};

/// Sparse coupling. Entries are kept sorted lexicographically by index with
/// no duplicates and no zero masses.
class TransportPlan {
 public:
  TransportPlan() = default;
  TransportPlan(std::vector<std::size_t> dims, std::vector<PlanEntry> entries);

  std::size_t arity() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<PlanEntry>& entries() const { return entries_; }
  std::size_t support_size() const { return entries_.size(); }

  double mass(int i, int j, int k = -1) const;
  double total_mass() const;
  std::vector<double> marginal(std::size_t axis) const;
  double objective(const CostMatrix& c) const;
  double objective(const CostTensor& c) const;
  /// Dense vector over the full index product (row-major).
  std::vector<double> dense() const;

  /// Throws DataError unless masses are nonnegative, the total is 1 and
  /// every marginal matches `weights[axis]` within tol.
  void check_feasible(const std::vector<std::vector<double>>& weights, double tol = 1e-9) const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<PlanEntry> entries_;
};

/// Potentials in the problem's own sign convention: sum <= c for minimize,
/// sum >= c for maximize.
struct DualCertificate {
  Sense sense = Sense::minimize;
  std::vector<std::vector<double>> potentials;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  /// Largest violation of dual feasibility over all cells.
  double max_dual_violation = 0.0;
};

struct TwoMarginalProblem {
  std::vector<double> a;
  std::vector<double> b;
  CostMatrix cost;
  Sense sense = Sense::minimize;
};

struct ThreeMarginalProblem {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
  CostTensor cost;
  Sense sense = Sense::maximize;
};

TwoMarginalProblem make_problem(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const CostModel& model, Sense sense);
ThreeMarginalProblem make_problem(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const DiscreteMeasure& gamma, const CostModel& model, Sense sense);

struct SolverOptions {
  /// Pivot cap; 0 selects 50*m*n + 10000 (two-marginal) or 100*cells (three).
  std::size_t max_pivots = 0;
  /// Three-marginal cap on n1*n2*n3.
  std::size_t max_cells3 = 20 * 20 * 20;
  /// Throw SolverError when the certified gap exceeds 1e-8*(1+|v*|).
  bool require_certificate = true;
};

struct TwoMarginalSolution {
  TransportPlan plan;
  DualCertificate cert;
  /// Basis cells as i*n + j.
  std::vector<int> basis;
  std::size_t pivots = 0;
};

struct ThreeMarginalSolution {
  TransportPlan plan;
  DualCertificate cert;
  std::size_t pivots = 0;
};

TwoMarginalSolution solve_two_marginal(const TwoMarginalProblem& problem,
                                       const SolverOptions& options = {});
TwoMarginalSolution solve_two_marginal(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const CostModel& model, Sense sense,
                                       const SolverOptions& options = {});

ThreeMarginalSolution solve_three_marginal(const ThreeMarginalProblem& problem,
                                           const SolverOptions& options = {});
ThreeMarginalSolution solve_three_marginal(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                           const DiscreteMeasure& gamma, const CostModel& model,
                                           Sense sense = Sense::maximize,
                                           const SolverOptions& options = {});

/// Nonnegative complementary slack of a cell under the certificate.
double slack(const TwoMarginalProblem& p, const DualCertificate& d, int i, int j);
double slack(const ThreeMarginalProblem& p, const DualCertificate& d, int i, int j, int k);

/// 1e-7 * (1 + max|c|).
double default_tol_s(double max_abs_cost);

struct MinimizingSet {
  std::size_t arity = 2;
  double tol = 0.0;
  /// Sorted lexicographically.
  std::vector<Index3> tuples;

  bool contains(int i, int j, int k = -1) const;
};

MinimizingSet minimizing_set(const TwoMarginalProblem& p, const DualCertificate& d, double tol);
MinimizingSet minimizing_set(const ThreeMarginalProblem& p, const DualCertificate& d, double tol);

struct DualityCheck {
  double gap = 0.0;
  double gap_tol = 0.0;
  double max_dual_violation = 0.0;
  /// Support entries whose slack exceeds tol_S.
  std::size_t support_outside_s = 0;
  bool ok = false;
};

/// Recomputes primal, dual and slacks from scratch.
DualityCheck check_duality(const TwoMarginalProblem& p, const TransportPlan& plan,
                           const DualCertificate& d, double tol_s);
DualityCheck check_duality(const ThreeMarginalProblem& p, const TransportPlan& plan,
                           const DualCertificate& d, double tol_s);

/// True when the two-marginal support, as a bipartite graph, has no cycle.
bool support_is_acyclic(const TransportPlan& plan);

/// A uniformly random linear objective over the full polytope, optimized;
/// the result is a vertex of Pi(a,b).
TransportPlan random_vertex(const std::vector<double>& a, const std::vector<double>& b,
                            std::uint64_t seed);

struct FaceProbeOptions {
  int trials = 20;
  std::uint64_t seed = 1;
  /// Cells with slack <= tol_face form the face support.
  double tol_face = 1e-9;
  double tol_plan = 1e-7;
  /// Run trials concurrently; results do not depend on this flag.
  bool parallel = true;
};

struct FaceProbe {
  double optimal_value = 0.0;
  std::vector<TransportPlan> witnesses;
  int face_dimension_lb = 0;
  /// Largest entrywise deviation of a witness from the incumbent plan.
  double max_deviation = 0.0;
  /// Every witness is feasible with objective within tol_face*(1+|v*|).
  bool witnesses_optimal = true;
  std::size_t face_cells = 0;
};

FaceProbe probe_optimal_face(const TwoMarginalProblem& p, const TwoMarginalSolution& s,
                             const FaceProbeOptions& options = {});
FaceProbe probe_optimal_face(const ThreeMarginalProblem& p, const ThreeMarginalSolution& s,
                             const FaceProbeOptions& options = {});

/// All vertices of Pi(mu,nu) in exact integer arithmetic; sizes <= 6 each.
std::vector<TransportPlan> enumerate_vertices_bruteforce(const DiscreteMeasure& mu,
                                                         const DiscreteMeasure& nu);
std::vector<TransportPlan> enumerate_vertices_bruteforce(const std::vector<double>& a,
                                                         const std::vector<double>& b);
/// Streams vertices instead of collecting them; returns the vertex count.
std::size_t for_each_vertex(const std::vector<double>& a, const std::vector<double>& b,
                            const std::function<void(const TransportPlan&)>& visit);

}  // namespace layered_ot
