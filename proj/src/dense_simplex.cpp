#include "dense_simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "layered_ot/errors.hpp"

namespace layered_ot::detail {

namespace {

constexpr double kPivTol = 1e-9;
constexpr std::size_t kRefactorEvery = 50;

}  // namespace

struct DenseSimplex::Impl {
  std::size_t r, N;
  const std::vector<std::vector<int>>& cols;
  const std::vector<double>& b;
  std::vector<int> basis;       // variable per basis position
  std::vector<int> pos;         // basis position per variable, -1 if nonbasic
  Eigen::MatrixXd Binv;
  Eigen::VectorXd xB;
  std::vector<char> blocked;    // variables that may not enter
  std::size_t pivots = 0;

  Impl(std::size_t rows, const std::vector<std::vector<int>>& c, const std::vector<double>& rhs)
      : r(rows), N(c.size()), cols(c), b(rhs) {
    basis.resize(r);
    pos.assign(N + r, -1);
    for (std::size_t k = 0; k < r; ++k) {
      basis[k] = static_cast<int>(N + k);
      pos[N + k] = static_cast<int>(k);
    }
    Binv = Eigen::MatrixXd::Identity(r, r);
    xB = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<long>(r));
    blocked.assign(N + r, 0);
  }

  Eigen::VectorXd column(int var) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<long>(r));
    if (var >= static_cast<int>(N)) a(var - static_cast<int>(N)) = 1.0;
    else for (int row : cols[var]) a(row) += 1.0;
    return a;
  }

  Eigen::VectorXd ftran(int var) const {
    if (var >= static_cast<int>(N)) return Binv.col(var - static_cast<int>(N));
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<long>(r));
    for (int row : cols[var]) u += Binv.col(row);
    return u;
  }

  double dot_col(const Eigen::VectorXd& y, int var) const {
    if (var >= static_cast<int>(N)) return y(var - static_cast<int>(N));
    double s = 0.0;
    for (int row : cols[var]) s += y(row);
    return s;
  }

  void refactor() {
    Eigen::MatrixXd B(r, r);
    for (std::size_t k = 0; k < r; ++k) B.col(static_cast<long>(k)) = column(basis[k]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Binv = lu.inverse();
    xB = Binv * Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<long>(r));
    for (long k = 0; k < xB.size(); ++k)
      if (xB(k) < 0.0 && xB(k) > -1e-11) xB(k) = 0.0;
  }

  void pivot(int enter, std::size_t leave_pos, const Eigen::VectorXd& u) {
    const double ur = u(static_cast<long>(leave_pos));
    const double theta = xB(static_cast<long>(leave_pos)) / ur;
    xB -= theta * u;
    xB(static_cast<long>(leave_pos)) = theta;
    const Eigen::RowVectorXd prow = Binv.row(static_cast<long>(leave_pos)) / ur;
    for (long i = 0; i < static_cast<long>(r); ++i)
      if (i != static_cast<long>(leave_pos) && u(i) != 0.0) Binv.row(i) -= u(i) * prow;
    Binv.row(static_cast<long>(leave_pos)) = prow;
    pos[basis[leave_pos]] = -1;
    basis[leave_pos] = enter;
    pos[enter] = static_cast<int>(leave_pos);
    ++pivots;
    if (pivots % kRefactorEvery == 0) refactor();
  }

  // Minimizes with costs c over variables not blocked; returns false at the
  // pivot cap.
  bool run(const std::vector<double>& c, std::size_t cap) {
    double cmax = 0.0;
    for (double v : c) cmax = std::max(cmax, std::abs(v));
    const double opt_tol = 1e-11 * (1.0 + cmax);
    std::size_t degenerate_run = 0;
    const std::size_t degenerate_limit = 2 * r + 10;
    for (;;) {
      Eigen::VectorXd cB(static_cast<long>(r));
      for (std::size_t k = 0; k < r; ++k) cB(static_cast<long>(k)) = c[basis[k]];
      const Eigen::VectorXd y = Binv.transpose() * cB;
      const bool bland = degenerate_run > degenerate_limit;
      int enter = -1;
      double best = -opt_tol;
      for (std::size_t j = 0; j < N + r; ++j) {
        if (pos[j] >= 0 || blocked[j]) continue;
        const double d = c[j] - dot_col(y, static_cast<int>(j));
        if (d < best) {
          enter = static_cast<int>(j);
          best = d;
          if (bland) break;
        }
      }
      if (enter < 0) return true;
      if (pivots >= cap) return false;
      const Eigen::VectorXd u = ftran(enter);
      long leave = -1;
      double theta = 0.0;
      for (long i = 0; i < static_cast<long>(r); ++i) {
        if (u(i) <= kPivTol) continue;
        const double t = std::max(0.0, xB(i)) / u(i);
        bool take = leave < 0 || t < theta - 1e-14;
        if (!take && t <= theta + 1e-14) {
          take = bland ? basis[i] < basis[leave] : u(i) > u(leave);
        }
        if (take) {
          leave = i;
          theta = t;
        }
      }
      if (leave < 0) throw SolverError("dense simplex: unbounded direction in a bounded LP");
      degenerate_run = theta > 1e-14 ? 0 : degenerate_run + 1;
      pivot(enter, static_cast<std::size_t>(leave), u);
    }
  }
};

DenseSimplex::DenseSimplex(std::size_t rows, std::vector<std::vector<int>> columns,
                           std::vector<double> rhs, std::vector<double> cost)
    : rows_(rows), cols_(std::move(columns)), rhs_(std::move(rhs)), cost_(std::move(cost)) {
  if (rhs_.size() != rows_) throw UsageError("dense simplex: rhs size mismatch");
  if (cost_.size() != cols_.size()) throw UsageError("dense simplex: cost size mismatch");
  for (double v : rhs_)
    if (v < 0.0) throw UsageError("dense simplex: rhs must be nonnegative");
}

void DenseSimplex::solve(std::size_t max_pivots) {
  const std::size_t N = cols_.size(), r = rows_;
  const std::size_t cap = max_pivots ? max_pivots : 100 * (N + r) + 1000;
  Impl s(r, cols_, rhs_);

  std::vector<double> c1(N + r, 0.0);
  for (std::size_t k = 0; k < r; ++k) c1[N + k] = 1.0;
  if (!s.run(c1, cap)) throw SolverError("dense simplex: pivot cap reached in phase 1");
  s.refactor();
  double infeas = 0.0;
  for (std::size_t k = 0; k < r; ++k)
    if (s.basis[k] >= static_cast<int>(N)) infeas += std::max(0.0, s.xB(static_cast<long>(k)));
  if (infeas > 1e-9) throw SolverError("dense simplex: infeasible (phase 1 residual " +
                                       std::to_string(infeas) + ")");
  // Drive zero artificials out of the basis where a structural column allows.
  redundant_ = 0;
  for (std::size_t k = 0; k < r; ++k) {
    if (s.basis[k] < static_cast<int>(N)) continue;
    const Eigen::RowVectorXd row = s.Binv.row(static_cast<long>(k));
    int enter = -1;
    double best = kPivTol;
    for (std::size_t j = 0; j < N; ++j) {
      if (s.pos[j] >= 0) continue;
      double v = 0.0;
      for (int rr : cols_[j]) v += row(rr);
      if (std::abs(v) > best) {
        best = std::abs(v);
        enter = static_cast<int>(j);
      }
    }
    if (enter < 0) {
      ++redundant_;
      continue;
    }
    s.xB(static_cast<long>(k)) = 0.0;
    s.pivot(enter, k, s.ftran(enter));
  }
  for (std::size_t k = 0; k < r; ++k) s.blocked[N + k] = 1;

  std::vector<double> c2(N + r, 0.0);
  std::copy(cost_.begin(), cost_.end(), c2.begin());
  if (!s.run(c2, cap)) throw SolverError("dense simplex: pivot cap reached in phase 2");
  s.refactor();

  x_.assign(N, 0.0);
  for (std::size_t k = 0; k < r; ++k) {
    const int var = s.basis[k];
    double v = s.xB(static_cast<long>(k));
    if (v < 0.0) {
      if (v < -1e-9) throw SolverError("dense simplex: negative basic value after refactor");
      v = 0.0;
    }
    if (var < static_cast<int>(N)) x_[var] = v;
  }
  Eigen::VectorXd cB(static_cast<long>(r));
  for (std::size_t k = 0; k < r; ++k) cB(static_cast<long>(k)) = c2[s.basis[k]];
  const Eigen::VectorXd y = s.Binv.transpose() * cB;
  y_.assign(y.data(), y.data() + y.size());
  pivots_ = s.pivots;
}

}  // namespace layered_ot::detail
