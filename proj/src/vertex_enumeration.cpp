// Exhaustive vertex enumeration of the transportation polytope Pi(a,b).
//
// Every vertex is a basic feasible solution whose basis is a spanning tree
// of the complete bipartite graph K_{m,n}. The feasible bases are connected
// under simplex pivots when every tie in the ratio test is followed, so a
// breadth-first search from one feasible basis reaches all of them. Flows
// are computed in exact integer arithmetic on the dyadic values of the
// double weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_set>

#include "layered_ot/errors.hpp"
#include "layered_ot/solver.hpp"

namespace layered_ot {

namespace {

__extension__ typedef __int128 i128;
constexpr int kMaxSide = 6;
constexpr std::size_t kMaxBases = 5'000'000;
constexpr int kMaxShift = 110;

struct ExactMarginals {
  std::vector<i128> a, b;
  double scale = 1.0;  // value = integer / scale
};

ExactMarginals to_exact(const std::vector<double>& a, const std::vector<double>& b) {
  int shift = 0;
  for (const auto* v : {&a, &b})
    for (double w : *v) {
      if (w < 0.0 || !std::isfinite(w)) throw UsageError("vertex enumeration: invalid weight");
      if (w == 0.0) continue;
      int e = 0;
      std::frexp(w, &e);
      shift = std::max(shift, 53 - e);
    }
  shift = std::min(shift, kMaxShift);
  ExactMarginals ex;
  ex.scale = std::ldexp(1.0, shift);
  auto conv = [&](double w) {
    const double s = std::ldexp(w, shift);
    // s is an integer below 2^(shift+1); split to stay exact beyond 2^63.
    const double hi = std::floor(std::ldexp(s, -60));
    const double lo = s - std::ldexp(hi, 60);
    return (static_cast<i128>(hi) << 60) + static_cast<i128>(std::llround(lo));
  };
  for (double w : a) ex.a.push_back(conv(w));
  for (double w : b) ex.b.push_back(conv(w));
  i128 sa = 0, sb = 0;
  for (i128 v : ex.a) sa += v;
  for (i128 v : ex.b) sb += v;
  // Absorb the rounding imbalance of the inputs into the largest target.
  auto big = std::max_element(ex.b.begin(), ex.b.end());
  *big += sa - sb;
  if (*big < 0) throw UsageError("vertex enumeration: marginals do not balance");
  return ex;
}

class Enumerator {
 public:
  Enumerator(std::size_t m, std::size_t n, const ExactMarginals& ex) : m_(m), n_(n), ex_(ex) {}

  // Rooted spanning tree of a basis mask with exact flows by leaf peeling;
  // returns false when the mask is not a spanning tree.
  bool build_tree(std::uint64_t mask) {
    const std::size_t N = m_ + n_;
    adj_.assign(N, {});
    for (std::size_t c = 0; c < m_ * n_; ++c)
      if (mask >> c & 1u) {
        adj_[c / n_].push_back(static_cast<int>(c));
        adj_[m_ + c % n_].push_back(static_cast<int>(c));
      }
    parent_.assign(N, -1);
    parent_cell_.assign(N, -1);
    depth_.assign(N, -1);
    order_.assign(1, 0);
    depth_[0] = 0;
    for (std::size_t h = 0; h < order_.size(); ++h) {
      const int v = order_[h];
      for (int c : adj_[v]) {
        const int w = v < static_cast<int>(m_) ? static_cast<int>(m_) + c % static_cast<int>(n_)
                                               : c / static_cast<int>(n_);
        if (depth_[w] >= 0) continue;
        depth_[w] = depth_[v] + 1;
        parent_[w] = v;
        parent_cell_[w] = c;
        order_.push_back(w);
      }
    }
    if (order_.size() != N) return false;
    std::vector<i128> rest(N);
    for (std::size_t i = 0; i < m_; ++i) rest[i] = ex_.a[i];
    for (std::size_t j = 0; j < n_; ++j) rest[m_ + j] = ex_.b[j];
    flow_.assign(m_ * n_, 0);
    for (std::size_t h = N; h-- > 1;) {
      const int v = order_[h];
      flow_[parent_cell_[v]] = rest[v];
      rest[parent_[v]] -= rest[v];
    }
    if (rest[0] != 0) return false;
    for (i128 f : flow_)
      if (f < 0) return false;
    return true;
  }

  // Cycle cells for entering cell (i,j); the cells at even positions of the
  // returned list lose flow.
  void cycle(int i, int j, std::vector<int>& minus) const {
    minus.clear();
    int a = i, b = static_cast<int>(m_) + j;
    std::size_t ta = 0, tb = 0;
    auto step = [&](int& v, std::size_t& t) {
      if (t % 2 == 0) minus.push_back(parent_cell_[v]);
      ++t;
      v = parent_[v];
    };
    while (depth_[a] > depth_[b]) step(a, ta);
    while (depth_[b] > depth_[a]) step(b, tb);
    while (a != b) {
      step(a, ta);
      step(b, tb);
    }
  }

  std::size_t run(const std::function<void(const TransportPlan&)>& visit) {
    std::uint64_t start = 0;
    {
      std::vector<i128> ra = ex_.a, rb = ex_.b;
      std::size_t i = 0, j = 0;
      for (std::size_t k = 0; k + 1 < m_ + n_; ++k) {
        start |= std::uint64_t{1} << (i * n_ + j);
        const i128 x = std::min(ra[i], rb[j]);
        ra[i] -= x;
        rb[j] -= x;
        if (ra[i] == 0 && i + 1 < m_) ++i;
        else ++j;
      }
    }
    std::unordered_set<std::uint64_t> bases{start}, supports;
    std::deque<std::uint64_t> queue{start};
    std::vector<int> minus;
    std::size_t count = 0;
    while (!queue.empty()) {
      const std::uint64_t mask = queue.front();
      queue.pop_front();
      if (!build_tree(mask)) throw SolverError("vertex enumeration: reached an invalid basis");
      std::uint64_t supp = 0;
      for (std::size_t c = 0; c < m_ * n_; ++c)
        if (flow_[c] > 0) supp |= std::uint64_t{1} << c;
      if (supports.insert(supp).second) {
        ++count;
        std::vector<PlanEntry> entries;
        for (std::size_t c = 0; c < m_ * n_; ++c)
          if (flow_[c] > 0)
            entries.push_back({{static_cast<int>(c / n_), static_cast<int>(c % n_), -1},
                               static_cast<double>(flow_[c]) / ex_.scale});
        visit(TransportPlan({m_, n_}, std::move(entries)));
      }
      for (std::size_t e = 0; e < m_ * n_; ++e) {
        if (mask >> e & 1u) continue;
        cycle(static_cast<int>(e / n_), static_cast<int>(e % n_), minus);
        i128 theta = -1;
        for (int c : minus)
          if (theta < 0 || flow_[c] < theta) theta = flow_[c];
        for (int c : minus) {
          if (flow_[c] != theta) continue;
          const std::uint64_t next = (mask & ~(std::uint64_t{1} << c)) | (std::uint64_t{1} << e);
          if (bases.insert(next).second) {
            if (bases.size() > kMaxBases)
              throw CapacityError("vertex enumeration: more than " + std::to_string(kMaxBases) +
                                  " feasible bases");
            queue.push_back(next);
          }
        }
      }
    }
    return count;
  }

 private:
  std::size_t m_, n_;
  const ExactMarginals& ex_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_, parent_cell_, depth_, order_;
  std::vector<i128> flow_;
};

}  // namespace

std::size_t for_each_vertex(const std::vector<double>& a, const std::vector<double>& b,
                            const std::function<void(const TransportPlan&)>& visit) {
  if (a.empty() || b.empty()) throw UsageError("vertex enumeration: empty marginal");
  if (a.size() > kMaxSide || b.size() > kMaxSide)
    throw CapacityError("vertex enumeration supports at most 6 points per marginal");
  const ExactMarginals ex = to_exact(a, b);
  Enumerator en(a.size(), b.size(), ex);
  return en.run(visit);
}

std::vector<TransportPlan> enumerate_vertices_bruteforce(const std::vector<double>& a,
                                                         const std::vector<double>& b) {
  std::vector<TransportPlan> out;
  for_each_vertex(a, b, [&](const TransportPlan& p) { out.push_back(p); });
  return out;
}

std::vector<TransportPlan> enumerate_vertices_bruteforce(const DiscreteMeasure& mu,
                                                         const DiscreteMeasure& nu) {
  return enumerate_vertices_bruteforce(mu.weights(), nu.weights());
}

}  // namespace layered_ot
