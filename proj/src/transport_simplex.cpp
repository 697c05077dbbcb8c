#include "transport_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "layered_ot/errors.hpp"

namespace layered_ot::detail {

TransportSimplex::TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                                   std::span<const double> cost)
    : m_(supply.size()),
      n_(demand.size()),
      supply_(supply.begin(), supply.end()),
      demand_(demand.begin(), demand.end()),
      cost_(cost) {
  if (m_ == 0 || n_ == 0) throw UsageError("transport simplex: empty marginal");
  if (cost_.size() != m_ * n_) throw UsageError("transport simplex: cost size mismatch");
  const std::size_t cells = m_ * n_;
  in_basis_.assign(cells, 0);
  flow_.assign(cells, 0.0);
  basis_pos_.assign(cells, -1);
  adj_.assign(m_ + n_, {});
  double cmax = 0.0;
  for (double c : cost_) cmax = std::max(cmax, std::abs(c));
  eps_cost_ = 1e-12 * (1.0 + cmax);
  block_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(cells))));
}

void TransportSimplex::add_basic(int cell) {
  in_basis_[cell] = 1;
  basis_pos_[cell] = static_cast<int>(basis_.size());
  basis_.push_back(cell);
  const int i = cell / static_cast<int>(n_), j = cell % static_cast<int>(n_);
  adj_[i].push_back(cell);
  adj_[m_ + j].push_back(cell);
}

void TransportSimplex::remove_basic(int cell) {
  in_basis_[cell] = 0;
  const int pos = basis_pos_[cell];
  basis_[pos] = basis_.back();
  basis_pos_[basis_[pos]] = pos;
  basis_.pop_back();
  basis_pos_[cell] = -1;
  const int i = cell / static_cast<int>(n_), j = cell % static_cast<int>(n_);
  for (auto* list : {&adj_[i], &adj_[m_ + j]}) {
    auto it = std::find(list->begin(), list->end(), cell);
    *it = list->back();
    list->pop_back();
  }
}

void TransportSimplex::init_least_cost() {
  const std::size_t cells = m_ * n_;
  std::vector<int> order;
  order.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c)
    if (allowed_.empty() || allowed_[c]) order.push_back(static_cast<int>(c));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cost_[a] < cost_[b]; });
  std::vector<double> ra = supply_, rb = demand_;
  std::vector<char> row_on(m_, 1), col_on(n_, 1);
  std::size_t rows_on = m_, cols_on = n_;
  const double eps_mass = 1e-15;
  for (int cell : order) {
    if (basis_.size() + 1 == m_ + n_) break;
    const int i = cell / static_cast<int>(n_), j = cell % static_cast<int>(n_);
    if (!row_on[i] || !col_on[j]) continue;
    const double x = std::min(ra[i], rb[j]);
    add_basic(cell);
    ra[i] -= x;
    rb[j] -= x;
    bool drop_row;
    if (rows_on == 1) drop_row = false;
    else if (cols_on == 1) drop_row = true;
    else if (std::abs(ra[i]) <= eps_mass && std::abs(rb[j]) <= eps_mass) drop_row = true;
    else drop_row = ra[i] <= rb[j];
    if (drop_row) {
      row_on[i] = 0;
      --rows_on;
    } else {
      col_on[j] = 0;
      --cols_on;
    }
  }
  if (basis_.size() + 1 != m_ + n_)
    throw SolverError("transport simplex: allowed cells do not support an initial basis");
  recompute_flows();
}

void TransportSimplex::init_basis(std::span<const int> cells) {
  if (cells.size() + 1 != m_ + n_) throw UsageError("transport simplex: basis must have m+n-1 cells");
  for (int c : cells) add_basic(c);
  recompute_flows();
}

void TransportSimplex::compute_tree() {
  const std::size_t N = m_ + n_;
  parent_node_.assign(N, -1);
  parent_cell_.assign(N, -1);
  depth_.assign(N, -1);
  pot_.assign(N, 0.0);
  bfs_.clear();
  bfs_.push_back(0);
  depth_[0] = 0;
  for (std::size_t h = 0; h < bfs_.size(); ++h) {
    const int a = bfs_[h];
    for (int cell : adj_[a]) {
      const int i = cell / static_cast<int>(n_);
      const int b = a < static_cast<int>(m_) ? static_cast<int>(m_) + cell % static_cast<int>(n_) : i;
      if (depth_[b] >= 0) continue;
      depth_[b] = depth_[a] + 1;
      parent_node_[b] = a;
      parent_cell_[b] = cell;
      pot_[b] = cost_[cell] - pot_[a];
      bfs_.push_back(b);
    }
  }
  if (bfs_.size() != N) throw SolverError("transport simplex: basis is not a spanning tree");
}

void TransportSimplex::recompute_flows() {
  compute_tree();
  // Peel leaves in reverse BFS order: each node's parent cell carries its
  // remaining imbalance.
  const std::size_t N = m_ + n_;
  std::vector<double> rest(N);
  for (std::size_t i = 0; i < m_; ++i) rest[i] = supply_[i];
  for (std::size_t j = 0; j < n_; ++j) rest[m_ + j] = demand_[j];
  for (int cell : basis_) flow_[cell] = 0.0;
  for (std::size_t h = N; h-- > 1;) {
    const int b = bfs_[h];
    const int cell = parent_cell_[b];
    const double x = rest[b];
    flow_[cell] = x;
    rest[parent_node_[b]] -= x;
  }
  for (int cell : basis_) {
    if (flow_[cell] < 0.0) {
      if (flow_[cell] < -1e-12) throw SolverError("transport simplex: infeasible basis");
      flow_[cell] = 0.0;
    }
  }
}

double TransportSimplex::reduced(int cell) const {
  const int i = cell / static_cast<int>(n_), j = cell % static_cast<int>(n_);
  return cost_[cell] - pot_[i] - pot_[m_ + j];
}

int TransportSimplex::price_block() {
  const std::size_t cells = m_ * n_;
  int best = -1;
  double best_d = -eps_cost_;
  std::size_t seen = 0;
  for (std::size_t k = 0; k < cells; ++k) {
    const std::size_t c = (next_ + k) % cells;
    if (enterable(static_cast<int>(c))) {
      const double d = reduced(static_cast<int>(c));
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    if (++seen == block_) {
      seen = 0;
      if (best >= 0) {
        next_ = (c + 1) % cells;
        return best;
      }
    }
  }
  return best;
}

int TransportSimplex::price_bland() {
  const std::size_t cells = m_ * n_;
  for (std::size_t c = 0; c < cells; ++c)
    if (enterable(static_cast<int>(c)) && reduced(static_cast<int>(c)) < -eps_cost_)
      return static_cast<int>(c);
  return -1;
}

void TransportSimplex::solve(std::size_t max_pivots) {
  if (basis_.empty()) init_least_cost();
  const std::size_t degenerate_limit = m_ + n_;
  std::size_t degenerate_run = 0;
  std::vector<int> plus, minus;
  for (;;) {
    compute_tree();
    const bool bland = degenerate_run > degenerate_limit;
    const int enter = bland ? price_bland() : price_block();
    if (enter < 0) break;
    if (pivots_ >= max_pivots)
      throw SolverError("transport simplex: pivot cap " + std::to_string(max_pivots) +
                        " reached (" + std::to_string(m_) + "x" + std::to_string(n_) +
                        ", degenerate run " + std::to_string(degenerate_run) + ")");
    // Cycle through the tree; cells at even distance from either endpoint
    // lose flow.
    int a = enter / static_cast<int>(n_);
    int b = static_cast<int>(m_) + enter % static_cast<int>(n_);
    std::vector<int> side_a, side_b;
    while (depth_[a] > depth_[b]) {
      side_a.push_back(parent_cell_[a]);
      a = parent_node_[a];
    }
    while (depth_[b] > depth_[a]) {
      side_b.push_back(parent_cell_[b]);
      b = parent_node_[b];
    }
    while (a != b) {
      side_a.push_back(parent_cell_[a]);
      a = parent_node_[a];
      side_b.push_back(parent_cell_[b]);
      b = parent_node_[b];
    }
    plus.clear();
    minus.clear();
    for (std::size_t t = 0; t < side_a.size(); ++t) (t % 2 == 0 ? minus : plus).push_back(side_a[t]);
    for (std::size_t t = 0; t < side_b.size(); ++t) (t % 2 == 0 ? minus : plus).push_back(side_b[t]);
    int leave = -1;
    double theta = 0.0;
    for (int c : minus)
      if (leave < 0 || flow_[c] < theta || (flow_[c] == theta && c < leave)) {
        leave = c;
        theta = flow_[c];
      }
    for (int c : plus) flow_[c] += theta;
    for (int c : minus) flow_[c] -= theta;
    flow_[leave] = 0.0;
    remove_basic(leave);
    add_basic(enter);
    flow_[enter] = theta;
    ++pivots_;
    degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    if (pivots_ % 2048 == 0) recompute_flows();
  }
  recompute_flows();
  u_.assign(pot_.begin(), pot_.begin() + static_cast<long>(m_));
  v_.assign(pot_.begin() + static_cast<long>(m_), pot_.end());
}

}  // namespace layered_ot::detail
