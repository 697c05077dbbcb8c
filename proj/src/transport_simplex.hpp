#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace layered_ot::detail {

/// Primal network simplex for the balanced transportation problem
/// min sum c_ij x_ij, row sums = supply, column sums = demand.
///
/// The basis is a spanning tree on the m + n line nodes (rows 0..m-1,
/// columns m..m+n-1). Pricing is block-Dantzig; after a run of degenerate
/// pivots the rule switches to Bland (smallest entering and leaving cell
/// index) until the next nondegenerate pivot.
class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                   std::span<const double> cost);

  /// Restricts entering cells to those with allowed[cell] != 0.
  void set_allowed(std::vector<char> allowed) { allowed_ = std::move(allowed); }

  /// Least-cost greedy start.
  void init_least_cost();
  /// Starts from a given spanning-tree basis (flows are recomputed).
  void init_basis(std::span<const int> cells);

  /// Runs to optimality; throws SolverError at the pivot cap.
  void solve(std::size_t max_pivots);

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  double flow(std::size_t cell) const { return flow_[cell]; }
  const std::vector<int>& basis() const { return basis_; }
  /// Potentials with u_0 = 0 and u_i + v_j = c_ij on basis cells.
  const std::vector<double>& row_potentials() const { return u_; }
  const std::vector<double>& col_potentials() const { return v_; }
  std::size_t pivots() const { return pivots_; }

 private:
  void add_basic(int cell);
  void remove_basic(int cell);
  void compute_tree();
  void recompute_flows();
  int price_block();
  int price_bland();
  double reduced(int cell) const;
  bool enterable(int cell) const { return !in_basis_[cell] && (allowed_.empty() || allowed_[cell]); }

  std::size_t m_, n_;
  std::vector<double> supply_, demand_;
  std::span<const double> cost_;
  std::vector<char> allowed_;
  std::vector<char> in_basis_;
  std::vector<double> flow_;
  std::vector<int> basis_;
  std::vector<int> basis_pos_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_node_, parent_cell_, depth_;
  std::vector<double> pot_;
  std::vector<double> u_, v_;
  std::vector<int> bfs_;
  std::size_t block_ = 0;
  std::size_t next_ = 0;
  double eps_cost_ = 0.0;
  std::size_t pivots_ = 0;
};

}  // namespace layered_ot::detail
