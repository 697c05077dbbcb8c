#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "layered_ot/kernels.hpp"
#include "layered_ot/solver.hpp"
#include "layered_ot/structure.hpp"

namespace layered_ot {

/// c_2(i,j) = ext_k [c(i,j,k) - phi3(k)], max for surplus problems.
struct ReducedCost {
  std::string base;
  Sense sense = Sense::maximize;
  int j = 2;
  std::vector<std::vector<double>> absorbed;
  CostMatrix values;
  /// Smallest absorbed index attaining the extremum per cell (row-major).
  std::vector<int> witness;
};

/// Only j = 2 of a three-marginal problem is supported; other j throw
/// UsageError.
ReducedCost build_reduced_cost(const ThreeMarginalProblem& p, const DualCertificate& duals,
                               int j = 2, const std::string& base_name = "surplus3");

/// The two-marginal problem (mu, nu, c_2) in the same sense.
TwoMarginalProblem reduced_problem(const ThreeMarginalProblem& p, const ReducedCost& c2);

/// (phi1, phi2) of a three-marginal certificate as a certificate of the
/// reduced problem, with primal, dual and violation recomputed.
DualCertificate reduced_certificate(const TwoMarginalProblem& p2, const DualCertificate& d3,
                                    const TransportPlan& lambda2);

struct RestrictionPair {
  TransportPlan full;
  TransportPlan restricted;
};

/// Sums the plan over the absorbed index; throws DataError when mass or the
/// kept marginals are not preserved within 1e-9.
RestrictionPair restrict_plan(const TransportPlan& lambda, int j = 2);

struct ProjectionReport {
  std::size_t projected_size = 0;
  std::size_t reduced_size = 0;
  /// Pairs in π_2(S) but not in S_2, and the converse.
  std::vector<std::pair<int, int>> only_projected;
  std::vector<std::pair<int, int>> only_reduced;

  bool equal() const { return only_projected.empty() && only_reduced.empty(); }
  bool projected_in_reduced() const { return only_projected.empty(); }
};

ProjectionReport check_projected_minimizing_set(const MinimizingSet& s3, const MinimizingSet& s2);

struct ExtremeChainReport {
  bool restricted_acyclic = false;
  bool conditional_acyclic = false;
  /// Support columns of the marginal constraint matrix are independent.
  bool direct_extreme = false;

  /// The chain is sufficient for extremality, not necessary.
  bool chain_certifies() const { return restricted_acyclic && conditional_acyclic; }
};

/// λ_2 extreme in Π(μ,ν) and λ extreme in Π(λ_2,γ), both by acyclicity of
/// the bipartite supports, next to a direct rank test of λ in Π(μ,ν,γ);
/// sizes at most 5 per marginal.
ExtremeChainReport check_extreme_chain(const TransportPlan& lambda, const TransportPlan& lambda2);

struct LayerCellReport {
  std::size_t max_partners = 0;
  /// Largest number of (y,z) partners of one source in one (layer_Y,layer_Z) cell.
  std::size_t max_per_cell = 0;
  std::vector<int> offenders;
};

/// Partners are flat indices j*|z| + k, as built by build_support_map.
LayerCellReport count_layer_cells(const SupportMap& support, const DiscreteMeasure& y,
                                  const DiscreteMeasure& z);

}  // namespace layered_ot
