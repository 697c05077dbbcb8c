#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "layered_ot/solver.hpp"

namespace oracle {

using layered_ot::Sense;

/// Exhaustive optimum of a three-marginal LP over all basic feasible
/// solutions (depth-first search over linearly independent column sets).
double three_marginal_optimum(const layered_ot::ThreeMarginalProblem& p);

/// A plan is a vertex of the coupling polytope iff its support columns in
/// the constraint matrix are linearly independent.
bool three_marginal_is_extreme(const layered_ot::ThreeMarginalProblem& p,
                               const layered_ot::TransportPlan& plan);

/// Vertices of Pi(a,b) counted by brute force over all (m+n-1)-subsets of
/// cells: spanning trees whose tree flow is nonnegative, distinct supports.
std::size_t count_vertices_by_subsets(const std::vector<double>& a, const std::vector<double>& b);

/// Midpoint-rule value of int_0^1 ((x-1)^2 + 1) dx on `grid` cells.
double atomic_midpoint_value(int grid);

/// Random probability vector with entries bounded away from zero.
std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n);

/// Random cost matrix with U(0,1) entries.
layered_ot::CostMatrix random_costs(std::mt19937_64& rng, std::size_t m, std::size_t n);

}  // namespace oracle
