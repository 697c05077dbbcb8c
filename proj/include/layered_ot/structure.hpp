#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "layered_ot/costs.hpp"
#include "layered_ot/kernels.hpp"
#include "layered_ot/measures.hpp"
#include "layered_ot/solver.hpp"

namespace layered_ot {

/// Realized F: partners of each source with mass above tol_support.
struct SupportMap {
  std::size_t sources = 0;
  std::size_t targets = 0;
  std::vector<std::vector<int>> partners;
  std::vector<std::vector<double>> mass;
  double tol_support = 1e-10;
  double dropped_mass = 0.0;
  std::size_t dropped_pairs = 0;

  std::size_t max_partners() const;
  std::size_t pair_count() const;
  std::vector<std::pair<int, int>> pairs() const;
};

/// Two-marginal plans map j directly; three-marginal plans use the flat
/// partner index j*n3 + k. With `target` and `space`, partners are sorted by
/// layer rank and then index; otherwise by index.
SupportMap build_support_map(const TransportPlan& plan, double tol_support = 1e-10,
                             const DiscreteMeasure* target = nullptr,
                             const LayeredSpace* space = nullptr);

/// F(i) from a minimizing set instead of a plan (masses left at zero).
SupportMap support_from_minimizing_set(const MinimizingSet& s, std::size_t sources,
                                       std::size_t targets);

struct KappaFP {
  /// Rank of the first layer meeting F(i); -1 when F(i) is empty.
  int kappa_rank = -1;
  int kappa_layer = -1;
  /// argmax of c over F(i) in layer kappa, all ties within 1e-10.
  std::vector<int> f_p;

  bool multi_valued() const { return f_p.size() > 1; }
};

/// Throws DataError for an untagged partner.
std::vector<KappaFP> kappa_and_fP(const SupportMap& support, const DiscreteMeasure& target,
                                  const LayeredSpace& space, const CostMatrix& cost);

/// Pairs (i, y*) where some y* in F(i) lies on a layer of lower rank than
/// the layer of f_P(i).
std::size_t count_layer_order_violations(const SupportMap& support,
                                         const std::vector<KappaFP>& kfp,
                                         const DiscreteMeasure& target, const LayeredSpace& space);

struct ExtremalityReport {
  bool condition1_holds = true;
  /// Up to `max_listed` triples (i1, i2, y*), i1 < i2.
  std::vector<std::array<int, 3>> violating_pairs;
  std::size_t violation_count = 0;
  std::size_t multi_valued_fp = 0;
  double tolerance = 1e-10;

  bool holds() const { return condition1_holds && violation_count == 0; }
};

/// Index masks for M (sources) and N (targets); empty masks select every
/// charged non-atom source and every non-atom target.
ExtremalityReport check_cP_extremality(const SupportMap& support, const std::vector<KappaFP>& kfp,
                                       const DiscreteMeasure& source, const DiscreteMeasure& target,
                                       std::vector<char> M = {}, std::vector<char> N = {},
                                       std::size_t max_listed = 64);

struct TwistReport {
  struct Sample {
    int i0 = -1;
    int j0 = -1;
    std::size_t count = 0;
  };
  std::vector<Sample> samples;
  std::size_t max_count = 0;
  std::size_t skipped = 0;
  double tol_col = 1e-7;
};

/// For sampled (i0, j0): #{ j : ∇_x c(x0,y_j) - ∇_x c(x0,y0) is zero or
/// parallel to n(x0) }, within tol_col (sine of the angle, or norm relative
/// to 1 + |∇_x c(x0,y0)|). Sources without a normal use equality only.
TwistReport count_twist(const DiscreteMeasure& sources, const DiscreteMeasure& targets,
                        const CostModel& model, double tol_col = 1e-7, std::size_t samples = 100,
                        std::uint64_t seed = 1);

/// Three-marginal variant over the realized partners (y,z) of each sampled
/// source; the support map uses flat partner indices j*n3 + k.
TwistReport count_twist3(const SupportMap& support, const DiscreteMeasure& sources,
                         const DiscreteMeasure& y, const DiscreteMeasure& z, const CostModel& model,
                         double tol_col = 1e-7, std::size_t samples = 100, std::uint64_t seed = 1);

struct GraphDecomposition {
  std::size_t K = 0;
  /// maps[k][i]: the layer-k partner of source i, or -1.
  std::vector<std::vector<int>> maps;
  std::vector<std::vector<double>> alpha;
  /// Layer index per map slot k.
  std::vector<int> layer_of_map;
  double residual = 0.0;
  double max_alpha_sum_error = 0.0;
};

/// Throws StructureViolation listing sources with two partners in a layer.
GraphDecomposition decompose_graphs(const TransportPlan& plan, const DiscreteMeasure& target,
                                    const LayeredSpace& space, const DiscreteMeasure& mu,
                                    double tol_support = 1e-10);

TransportPlan reconstruct_plan(const GraphDecomposition& g, const DiscreteMeasure& mu,
                               std::size_t targets);

struct CyclicalMonotonicityReport {
  std::size_t two_cycles_checked = 0;
  std::size_t two_cycle_violations = 0;
  double worst_two_cycle = 0.0;
  std::size_t sampled_cycles = 0;
  std::size_t sampled_violations = 0;
  double worst_sampled = 0.0;

  bool holds() const { return two_cycle_violations == 0 && sampled_violations == 0; }
};

/// All transpositions exhaustively, plus `samples` cyclic shifts over random
/// source subsets of size 3..cycle_len_max (tolerance 1e-9).
CyclicalMonotonicityReport check_cyclical_monotonicity(const SupportMap& support,
                                                       const CostMatrix& cost, Sense sense,
                                                       std::size_t cycle_len_max = 5,
                                                       std::size_t samples = 10000,
                                                       std::uint64_t seed = 1);

struct BoundaryNormalReport {
  std::size_t boundary_sources = 0;
  std::size_t boundary_multi = 0;
  std::vector<int> boundary_flagged;
  double worst_sine = 0.0;
  std::size_t interior_sources = 0;
  std::size_t interior_single = 0;
  std::vector<int> interior_flagged;

  double interior_single_fraction() const {
    return interior_sources ? static_cast<double>(interior_single) / interior_sources : 1.0;
  }
};

BoundaryNormalReport check_boundary_normal_lines(const TransportPlan& plan,
                                                 const MixedScenario& scenario,
                                                 const DiscreteMeasure& target, double tol = 1e-6,
                                                 double tol_support = 1e-10);

struct CriticalPointOptions {
  /// |⟨∇H,t⟩| <= zero_tol * max_k |⟨∇H,t⟩| marks a node as critical.
  double zero_tol = 1e-9;
};

/// Critical points of H restricted to a curve: sign changes of the
/// tangential derivative between consecutive nodes plus runs of vanishing
/// nodes; an open curve adds its two endpoints.
std::size_t count_critical_points(const GapProfile& profile, const CriticalPointOptions& o = {});

struct SubtwistReport {
  std::size_t pairs_checked = 0;
  std::size_t max_critical = 0;
  std::size_t pairs_above_two = 0;
  int worst_y1 = -1;
  int worst_y2 = -1;
};

SubtwistReport check_subtwist_uniqueness_setup(const CostModel& model, const ManifoldChart& chart,
                                               const DiscreteMeasure& targets, std::size_t samples,
                                               std::uint64_t seed = 1);

}  // namespace layered_ot
