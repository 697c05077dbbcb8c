#include "layered_ot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include "format.hpp"
#include "layered_ot/errors.hpp"

namespace layered_ot {

namespace {

constexpr double kMassTol = 1e-12;

void check_finite(const Point& p) {
  for (double v : p)
    if (!std::isfinite(v)) throw DataError("non-finite coordinate");
}

// Cell centres of [0,1]^n on a g^n grid, each coordinate shifted by `shift`.
std::vector<std::vector<double>> cube_cells(int n, int g, double shift) {
  std::vector<std::vector<double>> cells;
  std::vector<int> idx(n, 0);
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(g);
  cells.reserve(total);
  for (std::size_t c = 0; c < total; ++c) {
    std::vector<double> s(n);
    for (int a = 0; a < n; ++a) s[a] = (idx[a] + 0.5) / g + shift;
    cells.push_back(std::move(s));
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < g) break;
      idx[a] = 0;
    }
  }
  return cells;
}

void normalize_to(std::vector<double>& w, std::size_t begin, std::size_t end, double mass) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += w[i];
  if (s <= 0.0) throw ConfigError("density has zero total mass");
  for (std::size_t i = begin; i < end; ++i) w[i] *= mass / s;
}

std::vector<double> resolve_t(const std::vector<double>& t, int K) {
  if (K < 1) throw ConfigError("K must be at least 1");
  if (t.empty()) return std::vector<double>(K, 1.0 / K);
  if (static_cast<int>(t.size()) != K)
    throw ConfigError("layer weights t must have K entries");
  double s = 0.0;
  for (double v : t) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("layer weights must be nonnegative");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw ConfigError("layer weights must sum to 1");
  return t;
}

// Multiplicative density factors for continuous perturbation.
void perturb_continuous(std::vector<double>& w, std::size_t begin, std::size_t end,
                        double amplitude, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  for (std::size_t i = begin; i < end; ++i) w[i] *= 1.0 + u(rng);
}

// Distributes round(mass/quantum) units over [begin,end), one unit each and
// the rest at random.
void perturb_quantized(std::vector<double>& w, std::size_t begin, std::size_t end, double mass,
                       double quantum, std::mt19937_64& rng) {
  const double units_real = mass / quantum;
  const long long units = std::llround(units_real);
  if (std::abs(units_real - static_cast<double>(units)) > 1e-9)
    throw ConfigError("quantized perturbation: layer mass is not a multiple of the source cell mass");
  const long long cells = static_cast<long long>(end - begin);
  if (cells > units)
    throw ConfigError("quantized perturbation: fewer mass units than target cells");
  std::vector<long long> count(cells, 1);
  std::uniform_int_distribution<long long> pick(0, cells - 1);
  for (long long r = 0; r < units - cells; ++r) ++count[pick(rng)];
  for (long long c = 0; c < cells; ++c) w[begin + c] = count[c] * (mass / units);
}

}  // namespace

void Layer::validate() const {
  const std::size_t dim = normal.size();
  if (std::abs(norm(normal) - 1.0) > 1e-12) throw ConfigError("layer normal must be a unit vector");
  if (anchor.size() != dim) throw ConfigError("layer anchor dimension mismatch");
  for (std::size_t a = 0; a < basis.size(); ++a) {
    if (basis[a].size() != dim) throw ConfigError("layer basis dimension mismatch");
    if (std::abs(dot(basis[a], normal)) > 1e-12) throw ConfigError("layer normal not orthogonal to basis");
    for (std::size_t b = a; b < basis.size(); ++b) {
      const double expect = a == b ? 1.0 : 0.0;
      if (std::abs(dot(basis[a], basis[b]) - expect) > 1e-12)
        throw ConfigError("layer basis not orthonormal");
    }
  }
}

LayeredSpace::LayeredSpace(std::vector<Layer> layers, std::vector<int> partition_order)
    : layers_(std::move(layers)), order_(std::move(partition_order)) {
  for (const Layer& l : layers_) l.validate();
  for (std::size_t a = 0; a < layers_.size(); ++a)
    for (std::size_t b = a + 1; b < layers_.size(); ++b) {
      if (layers_[a].index == layers_[b].index) throw ConfigError("duplicate layer index");
      const bool same_plane = std::abs(layers_[a].offset - layers_[b].offset) <= 1e-12 &&
                              distance(layers_[a].normal, layers_[b].normal) <= 1e-12;
      if (same_plane) throw ConfigError("layer offsets must be pairwise distinct");
    }
  if (order_.empty()) {
    for (const Layer& l : layers_) order_.push_back(l.index);
  } else {
    std::vector<int> a = order_, b;
    for (const Layer& l : layers_) b.push_back(l.index);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw ConfigError("partition order must be a permutation of the layer indices");
  }
}

int LayeredSpace::rank_of(int index) const {
  for (std::size_t r = 0; r < order_.size(); ++r)
    if (order_[r] == index) return static_cast<int>(r);
  throw DataError("point tagged with unknown layer " + std::to_string(index));
}

const Layer& LayeredSpace::layer(int index) const {
  for (const Layer& l : layers_)
    if (l.index == index) return l;
  throw DataError("unknown layer " + std::to_string(index));
}

DiscreteMeasure::DiscreteMeasure(std::vector<Point> points, std::vector<double> weights,
                                 std::vector<int> layer_tags, std::vector<char> atoms,
                                 std::vector<Point> normals)
    : points_(std::move(points)),
      weights_(std::move(weights)),
      tags_(std::move(layer_tags)),
      atoms_(std::move(atoms)),
      normals_(std::move(normals)) {
  const std::size_t n = points_.size();
  if (n == 0) throw DataError("measure has no points");
  if (weights_.size() != n) throw DataError("weights/points size mismatch");
  if (!tags_.empty() && tags_.size() != n) throw DataError("layer tags size mismatch");
  if (!atoms_.empty() && atoms_.size() != n) throw DataError("atom flags size mismatch");
  if (!normals_.empty() && normals_.size() != n) throw DataError("normals size mismatch");
  const std::size_t d = points_.front().size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (points_[i].size() != d) throw DataError("points of mixed dimension");
    check_finite(points_[i]);
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) throw DataError("negative weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > kMassTol) throw DataError("weights do not sum to 1");
  // Distinctness: sort by first coordinate and compare within a 1e-12 window.
  std::vector<std::size_t> ord(n);
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(),
            [&](std::size_t a, std::size_t b) { return points_[a][0] < points_[b][0]; });
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n && points_[ord[b]][0] - points_[ord[a]][0] <= 1e-12; ++b)
      if (distance(points_[ord[a]], points_[ord[b]]) <= 1e-12)
        throw DataError("coincident points in measure");
}

Perturbation parse_perturbation(const std::string& s) {
  if (s == "none") return Perturbation::none;
  if (s == "continuous") return Perturbation::continuous;
  if (s == "quantized") return Perturbation::quantized;
  throw ConfigError("unknown perturbation '" + s + "'");
}

std::string to_string(Perturbation p) {
  switch (p) {
    case Perturbation::none: return "none";
    case Perturbation::continuous: return "continuous";
    case Perturbation::quantized: return "quantized";
  }
  return "none";
}

namespace {

struct PlaneGeometry {
  Point anchor;
  Point normal;
  std::vector<Point> basis;
};

PlaneGeometry plane_geometry(const PlaneSpec& p, int n) {
  if (static_cast<int>(p.normal.size()) != n + 1 || static_cast<int>(p.anchor.size()) != n + 1)
    throw ConfigError("plane anchor/normal must have n+1 coordinates");
  PlaneGeometry g;
  g.anchor = p.anchor;
  g.normal = unit(p.normal);
  g.basis = orthonormal_complement(g.normal);
  return g;
}

LayeredScenario build_planes(int n, int grid, int target_grid, std::uint64_t seed,
                             const PlaneGeometry& src, const std::vector<PlaneGeometry>& layers,
                             const std::vector<double>& offsets, const std::vector<double>& t,
                             Perturbation perturb, double amplitude, bool atomic_first,
                             double jitter) {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (grid < 2) throw ConfigError("grid must be at least 2");
  const int tg = target_grid == 0 ? grid : target_grid;
  if (tg < 1) throw ConfigError("target_grid must be positive");
  if (perturb == Perturbation::continuous && !(amplitude > 0.0 && amplitude < 1.0))
    throw ConfigError("perturbation amplitude must lie in (0,1)");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw ConfigError("jitter must lie in [0,1)");
  std::mt19937_64 jrng(seed ^ 0x6a09e667f3bcc909ULL);
  std::uniform_real_distribution<double> ju(-0.5, 0.5);
  const int K = static_cast<int>(layers.size());
  std::mt19937_64 rng(seed);

  auto embed = [&](const PlaneGeometry& g, const std::vector<double>& s) {
    Point p = g.anchor;
    for (int a = 0; a < n; ++a)
      for (int c = 0; c <= n; ++c) p[c] += s[a] * g.basis[a][c];
    return p;
  };

  std::vector<Point> sp;
  for (const auto& s : cube_cells(n, grid, 0.0)) sp.push_back(embed(src, s));
  std::vector<double> sw(sp.size(), 1.0);
  if (perturb == Perturbation::continuous) perturb_continuous(sw, 0, sw.size(), amplitude, rng);
  normalize_to(sw, 0, sw.size(), 1.0);
  const double quantum = 1.0 / static_cast<double>(sp.size());
  std::vector<Point> sn(sp.size(), src.normal);

  std::vector<Point> tp;
  std::vector<double> tw;
  std::vector<int> tags;
  std::vector<char> atoms;
  std::vector<Point> tn;
  std::vector<Layer> ls;
  for (int k = 0; k < K; ++k) {
    const PlaneGeometry& g = layers[k];
    const std::size_t begin = tp.size();
    if (k == 0 && atomic_first) {
      tp.push_back(embed(g, std::vector<double>(n, 0.5)));
      tw.push_back(t[0]);
      atoms.push_back(1);
    } else {
      const double shift = static_cast<double>(k) / (static_cast<double>(K) * tg);
      for (auto s : cube_cells(n, tg, shift)) {
        if (jitter > 0.0)
          for (double& v : s) v += jitter * ju(jrng) / tg;
        tp.push_back(embed(g, s));
        tw.push_back(1.0);
        atoms.push_back(0);
      }
      if (perturb == Perturbation::continuous) perturb_continuous(tw, begin, tw.size(), amplitude, rng);
    }
    const std::size_t end = tp.size();
    if (t[k] == 0.0) {
      // An empty layer keeps its points with zero mass.
      for (std::size_t i = begin; i < end; ++i) tw[i] = 0.0;
    } else if (perturb == Perturbation::quantized && !(k == 0 && atomic_first)) {
      perturb_quantized(tw, begin, end, t[k], quantum, rng);
    } else {
      normalize_to(tw, begin, end, t[k]);
    }
    for (std::size_t i = begin; i < end; ++i) {
      tags.push_back(k + 1);
      tn.push_back(g.normal);
    }
    Layer layer;
    layer.index = k + 1;
    layer.offset = offsets[k];
    layer.anchor = g.anchor;
    layer.basis = g.basis;
    layer.normal = g.normal;
    ls.push_back(std::move(layer));
  }
  // Renormalize against accumulated rounding so the total is exact to 1e-12.
  double total = std::accumulate(tw.begin(), tw.end(), 0.0);
  for (double& w : tw) w /= total;

  LayeredScenario sc;
  sc.source = DiscreteMeasure(std::move(sp), std::move(sw), {}, {}, std::move(sn));
  sc.target = DiscreteMeasure(std::move(tp), std::move(tw), std::move(tags), std::move(atoms),
                              std::move(tn));
  sc.space = LayeredSpace(std::move(ls));
  return sc;
}

PlaneGeometry axis_plane(int n, double offset) {
  PlaneGeometry g;
  g.anchor.assign(n + 1, 0.0);
  g.anchor[n] = offset;
  g.normal.assign(n + 1, 0.0);
  g.normal[n] = 1.0;
  for (int a = 0; a < n; ++a) {
    Point e(n + 1, 0.0);
    e[a] = 1.0;
    g.basis.push_back(std::move(e));
  }
  return g;
}

}  // namespace

LayeredScenario make_layered_scenario(const LayeredScenarioParams& p) {
  const std::vector<double> t = resolve_t(p.t, p.K);
  std::vector<double> offsets = p.offsets;
  if (offsets.empty())
    for (int k = 1; k <= p.K; ++k) offsets.push_back(static_cast<double>(k));
  if (static_cast<int>(offsets.size()) != p.K) throw ConfigError("offsets must have K entries");
  if (p.n < 1) throw ConfigError("n must be at least 1");
  std::vector<PlaneGeometry> layers;
  for (double o : offsets) {
    if (std::abs(o - p.source_offset) <= 1e-12)
      throw ConfigError("a layer offset coincides with the source plane");
    layers.push_back(axis_plane(p.n, o));
  }
  return build_planes(p.n, p.grid, p.target_grid, p.seed, axis_plane(p.n, p.source_offset), layers,
                      offsets, t, p.perturb, p.amplitude, p.atomic_first_layer, p.jitter);
}

ThreeMarginalScenario make_three_marginal_scenario(const ThreeMarginalScenarioParams& p) {
  LayeredScenarioParams a;
  a.n = p.n;
  a.grid = p.grid;
  a.target_grid = p.target_grid;
  a.perturb = p.perturb;
  a.amplitude = p.amplitude;
  a.jitter = p.jitter;
  a.K = p.K;
  a.t = p.t;
  a.offsets = p.y_offsets;
  a.seed = p.seed;
  LayeredScenarioParams b = a;
  b.K = p.L;
  b.t = p.s;
  b.offsets = p.z_offsets;
  if (b.offsets.empty())
    for (int l = 1; l <= p.L; ++l) b.offsets.push_back(-static_cast<double>(l));
  std::seed_seq seq{static_cast<std::uint32_t>(p.seed), static_cast<std::uint32_t>(p.seed >> 32),
                    0x7a7au};
  std::uint32_t z_seed[2];
  seq.generate(z_seed, z_seed + 2);
  b.seed = (static_cast<std::uint64_t>(z_seed[0]) << 32) | z_seed[1];
  LayeredScenario ys = make_layered_scenario(a);
  LayeredScenario zs = make_layered_scenario(b);
  return {std::move(ys.source), std::move(ys.target), std::move(zs.target), std::move(ys.space),
          std::move(zs.space)};
}

LayeredScenario make_layered_scenario(int K, int n, int grid, std::uint64_t seed,
                                      const std::vector<double>& t) {
  LayeredScenarioParams p;
  p.K = K;
  p.n = n;
  p.grid = grid;
  p.seed = seed;
  p.t = t;
  return make_layered_scenario(p);
}

LayeredScenario make_tilted_scenario(const TiltedScenarioParams& p) {
  if (p.layers.empty()) throw ConfigError("tilted scenario needs at least one layer");
  const int K = static_cast<int>(p.layers.size());
  const std::vector<double> t = resolve_t(p.t, K);
  const PlaneGeometry src = plane_geometry(p.source, p.n);
  std::vector<PlaneGeometry> layers;
  std::vector<double> offsets;
  for (const PlaneSpec& s : p.layers) {
    layers.push_back(plane_geometry(s, p.n));
    offsets.push_back(dot(layers.back().anchor, layers.back().normal));
  }
  return build_planes(p.n, p.grid, p.target_grid, p.seed, src, layers, offsets, t, p.perturb,
                      p.amplitude, false, p.jitter);
}

LayeredScenario make_counterexample_atomic(int grid) {
  if (grid < 1) throw ConfigError("grid must be positive");
  std::vector<Point> sp;
  for (int a = 0; a < grid; ++a) sp.push_back({(a + 0.5) / grid, 0.0});
  std::vector<double> sw(sp.size(), 1.0 / grid);
  std::vector<Point> sn(sp.size(), Point{0.0, 1.0});

  std::vector<Point> tp{{1.0, 1.0}, {1.0, -1.0}};
  std::vector<double> tw{0.5, 0.5};
  std::vector<int> tags{1, 2};
  std::vector<char> atoms{1, 1};
  std::vector<Point> tn{{0.0, 1.0}, {0.0, 1.0}};

  std::vector<Layer> ls;
  for (int k = 0; k < 2; ++k) {
    Layer l;
    l.index = k + 1;
    l.offset = k == 0 ? 1.0 : -1.0;
    l.anchor = {0.0, l.offset};
    l.basis = {{1.0, 0.0}};
    l.normal = {0.0, 1.0};
    ls.push_back(l);
  }
  LayeredScenario sc;
  sc.source = DiscreteMeasure(std::move(sp), std::move(sw), {}, {}, std::move(sn));
  sc.target = DiscreteMeasure(std::move(tp), std::move(tw), std::move(tags), std::move(atoms),
                              std::move(tn));
  sc.space = LayeredSpace(std::move(ls));
  return sc;
}

PerpendicularScenario make_counterexample_perpendicular(int grid) {
  if (grid < 1) throw ConfigError("grid must be positive");
  std::vector<Point> sp, tp;
  for (int a = 0; a < grid; ++a) {
    sp.push_back({(a + 0.5) / grid, 0.0});
    tp.push_back({0.0, (a + 0.5) / grid});
  }
  std::vector<double> w(grid, 1.0 / grid);
  PerpendicularScenario sc;
  sc.source = DiscreteMeasure(std::move(sp), w, {}, {}, std::vector<Point>(grid, Point{0.0, 1.0}));
  sc.target = DiscreteMeasure(std::move(tp), w, std::vector<int>(grid, 1), {},
                              std::vector<Point>(grid, Point{1.0, 0.0}));
  return sc;
}

Shape Shape::ball(int dim, double radius) {
  Shape s;
  s.kind = ShapeKind::ball;
  s.axes.assign(dim, radius);
  return s;
}

Shape Shape::ellipsoid(std::vector<double> semi_axes) {
  Shape s;
  s.kind = ShapeKind::ellipsoid;
  s.axes = std::move(semi_axes);
  return s;
}

MixedScenario make_mixed_boundary_scenario(const MixedMeasureSpec& spec, const Shape& shape,
                                           int grid) {
  if (shape.kind == ShapeKind::box)
    throw UnsupportedShape("box is convex but not strictly convex");
  if (shape.kind == ShapeKind::annulus) throw UnsupportedShape("annulus is not convex");
  const int d = static_cast<int>(shape.axes.size());
  if (d != 2 && d != 3) throw UnsupportedShape("only 2D and 3D shapes are supported");
  for (double a : shape.axes)
    if (!(a > 0.0)) throw UnsupportedShape("semi-axes must be positive");
  if (!(spec.split >= 0.0 && spec.split <= 1.0)) throw ConfigError("split s must lie in [0,1]");
  if (grid < 2) throw ConfigError("grid must be at least 2");
  if (!(spec.jitter >= 0.0 && spec.jitter < 1.0)) throw ConfigError("jitter must lie in [0,1)");
  const auto& A = shape.axes;
  std::mt19937_64 jrng(spec.seed ^ 0x6a09e667f3bcc909ULL);
  std::uniform_real_distribution<double> ju(-0.5, 0.5);
  auto alpha = spec.interior_density ? spec.interior_density : [](const Point&) { return 1.0; };
  auto beta = spec.boundary_density ? spec.boundary_density : [](const Point&) { return 1.0; };

  std::vector<Point> pts;
  std::vector<double> w;
  std::vector<Region> region;
  std::vector<Point> normals;

  if (spec.split > 0.0) {
    std::vector<int> idx(d, 0);
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= grid;
    for (std::size_t c = 0; c < total; ++c) {
      Point x(d);
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        x[a] = A[a] * (-1.0 + 2.0 * (idx[a] + 0.5) / grid);
        r2 += (x[a] / A[a]) * (x[a] / A[a]);
      }
      if (r2 < 1.0 - 1e-12 && spec.jitter > 0.0) {
        // Membership follows the cell centre; a jittered point that leaves
        // the shape falls back to the centre.
        Point y = x;
        double q2 = 0.0;
        for (int a = 0; a < d; ++a) {
          y[a] += A[a] * 2.0 * spec.jitter * ju(jrng) / grid;
          q2 += (y[a] / A[a]) * (y[a] / A[a]);
        }
        if (q2 < 1.0 - 1e-12) x = y;
      }
      if (r2 < 1.0 - 1e-12) {
        const double a = alpha(x);
        if (!(a >= 0.0)) throw ConfigError("interior density must be nonnegative");
        pts.push_back(x);
        w.push_back(a);
        region.push_back(Region::interior);
        normals.emplace_back();
      }
      for (int a = d - 1; a >= 0; --a) {
        if (++idx[a] < grid) break;
        idx[a] = 0;
      }
    }
    normalize_to(w, 0, w.size(), spec.split);
  }
  const std::size_t nb_begin = pts.size();
  if (spec.split < 1.0) {
    const int nodes = spec.boundary_nodes > 0 ? spec.boundary_nodes : 2 * grid;
    // Map a unit-sphere direction u to the ellipsoid point A u, its outward
    // normal ∝ A^{-1} u, and the area stretch |det A| |A^{-1} u|.
    auto push_node = [&](const Point& u, double sphere_area) {
      Point x(d), nrm(d);
      double det = 1.0;
      for (int a = 0; a < d; ++a) {
        x[a] = A[a] * u[a];
        nrm[a] = u[a] / A[a];
        det *= A[a];
      }
      const double stretch = det * norm(nrm);
      const double b = beta(x);
      if (!(b >= 0.0)) throw ConfigError("boundary density must be nonnegative");
      pts.push_back(x);
      w.push_back(b * sphere_area * stretch);
      region.push_back(Region::boundary);
      normals.push_back(unit(nrm));
    };
    if (d == 2) {
      for (int k = 0; k < nodes; ++k) {
        const double th = 2.0 * std::numbers::pi * (k + 0.5) / nodes;
        push_node({std::cos(th), std::sin(th)}, 2.0 * std::numbers::pi / nodes);
      }
    } else {
      for (int band = 0; band < nodes; ++band) {
        const double z = -1.0 + 2.0 * (band + 0.5) / nodes;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const int count = std::max(3, static_cast<int>(std::lround(2.0 * nodes * rho)));
        const double band_area = 4.0 * std::numbers::pi / nodes;
        for (int k = 0; k < count; ++k) {
          const double th = 2.0 * std::numbers::pi * (k + 0.5 * (band % 2) + 0.25) / count;
          push_node({rho * std::cos(th), rho * std::sin(th), z}, band_area / count);
        }
      }
    }
    normalize_to(w, nb_begin, w.size(), 1.0 - spec.split);
  }
  MixedScenario sc;
  std::vector<Point> mnormals = normals;
  sc.measure = DiscreteMeasure(std::move(pts), std::move(w), {}, {}, std::move(mnormals));
  sc.region = std::move(region);
  sc.boundary_normal = std::move(normals);
  return sc;
}

namespace {

// Boundary node whose direction is closest in angle to each interior point.
std::vector<std::size_t> nearest_ray(const MixedScenario& sc, const std::vector<std::size_t>& interior,
                                     const std::vector<std::size_t>& boundary) {
  std::vector<std::size_t> owner(interior.size(), 0);
  for (std::size_t t = 0; t < interior.size(); ++t) {
    const Point& x = sc.measure.point(interior[t]);
    if (norm(x) == 0.0) continue;
    double best = -2.0;
    for (std::size_t b = 0; b < boundary.size(); ++b) {
      const double c = dot(x, sc.measure.point(boundary[b])) / (norm(x) * norm(sc.measure.point(boundary[b])));
      if (c > best) {
        best = c;
        owner[t] = b;
      }
    }
  }
  return owner;
}

std::vector<long> nearest_ray_counts(const MixedScenario& sc, const std::vector<std::size_t>& interior,
                                     const std::vector<std::size_t>& boundary) {
  std::vector<long> counts(boundary.size(), 0);
  for (std::size_t b : nearest_ray(sc, interior, boundary)) ++counts[b];
  return counts;
}

}  // namespace

BoundaryFanScenario make_boundary_fan_scenario(const MixedMeasureSpec& spec, const Shape& shape,
                                               int grid, const RadialFanSpec& fan) {
  if (fan.points_per_ray < 1) throw ConfigError("fan needs at least one point per ray");
  if (!(fan.r_min > 0.0 && fan.r_max >= fan.r_min)) throw ConfigError("fan radii must satisfy 0 < r_min <= r_max");
  if (!(fan.dilation > 0.0)) throw ConfigError("fan dilation must be positive");
  BoundaryFanScenario out;
  out.source = make_mixed_boundary_scenario(spec, shape, grid);
  const MixedScenario& sc = out.source;
  std::vector<std::size_t> interior, boundary;
  for (std::size_t i = 0; i < sc.region.size(); ++i)
    (sc.region[i] == Region::interior ? interior : boundary).push_back(i);
  if (boundary.empty()) throw ConfigError("fan targets need boundary nodes (split < 1)");
  const std::size_t NB = boundary.size(), R = static_cast<std::size_t>(fan.points_per_ray);
  std::mt19937_64 rng(fan.seed);
  const bool shared = fan.interior == FanInterior::shared;

  std::vector<double> ray_mass(NB), source_w = sc.measure.weights();
  std::vector<std::vector<double>> point_w(NB, std::vector<double>(R, 0.0));
  if (fan.quantized) {
    if (interior.empty()) throw ConfigError("quantized fan needs interior cells (split > 0)");
    const double q = sc.measure.weight(interior.front());
    for (std::size_t i : interior)
      if (std::abs(sc.measure.weight(i) - q) > 1e-12 * q)
        throw ConfigError("quantized fan needs a uniform interior density");
    std::vector<long> units(NB);
    long total = static_cast<long>(interior.size());
    for (std::size_t b = 0; b < NB; ++b) {
      units[b] = std::max(1L, std::lround(sc.measure.weight(boundary[b]) / q));
      total += units[b];
    }
    const double unit_mass = 1.0 / static_cast<double>(total);
    for (std::size_t i : interior) source_w[i] = unit_mass;
    for (std::size_t b = 0; b < NB; ++b) source_w[boundary[b]] = static_cast<double>(units[b]) * unit_mass;
    const long m_int = static_cast<long>(interior.size());
    const std::vector<long> share =
        shared ? nearest_ray_counts(sc, interior, boundary) : std::vector<long>(NB, 0);
    std::uniform_int_distribution<std::size_t> pick(0, R - 1);
    for (std::size_t b = 0; b < NB; ++b) {
      const long ray = units[b] + share[b];
      if (ray < static_cast<long>(R))
        throw ConfigError("fan ray carries fewer units than points per ray");
      std::vector<long> u(R, 1);
      for (long e = 0; e < ray - static_cast<long>(R); ++e) ++u[pick(rng)];
      for (std::size_t r = 0; r < R; ++r) point_w[b][r] = static_cast<double>(u[r]) * unit_mass;
    }
    out.split = static_cast<double>(m_int) * unit_mass;
  } else {
    double s_int = 0.0;
    std::vector<double> share(NB, 0.0);
    const std::vector<std::size_t> owner = nearest_ray(sc, interior, boundary);
    for (std::size_t t = 0; t < interior.size(); ++t) {
      s_int += sc.measure.weight(interior[t]);
      if (shared) share[owner[t]] += sc.measure.weight(interior[t]);
    }
    std::uniform_real_distribution<double> f(0.5, 1.5);
    for (std::size_t b = 0; b < NB; ++b) {
      const double ray = sc.measure.weight(boundary[b]) + share[b];
      std::vector<double> g(R);
      double gs = 0.0;
      for (double& v : g) gs += (v = f(rng));
      for (std::size_t r = 0; r < R; ++r) point_w[b][r] = ray * g[r] / gs;
    }
    out.split = s_int;
  }
  std::vector<Point> tp;
  std::vector<double> tw;
  if (!shared)
    for (std::size_t i : interior) {
      tp.push_back(scaled(sc.measure.point(i), fan.dilation));
      tw.push_back(source_w[i]);
    }
  for (std::size_t b = 0; b < NB; ++b) {
    const Point xb = scaled(sc.measure.point(boundary[b]), fan.dilation);
    const Point& nb = sc.boundary_normal[boundary[b]];
    for (std::size_t r = 0; r < R; ++r) {
      const double rho =
          R == 1 ? fan.r_min : fan.r_min + (fan.r_max - fan.r_min) * static_cast<double>(r) / (R - 1);
      tp.push_back(add(xb, scaled(nb, rho)));
      tw.push_back(point_w[b][r]);
    }
  }
  const double total = std::accumulate(tw.begin(), tw.end(), 0.0);
  for (double& v : tw) v /= total;
  std::vector<Point> pts = sc.measure.points();
  std::vector<Point> normals = sc.boundary_normal;
  out.source.measure = DiscreteMeasure(std::move(pts), std::move(source_w), {}, {}, std::move(normals));
  out.target = DiscreteMeasure(std::move(tp), std::move(tw));
  return out;
}

void write_measure_tsv(std::ostream& os, const DiscreteMeasure& m) {
  os << "# weight";
  for (std::size_t c = 0; c < m.dim(); ++c) os << "\tcoord_" << c;
  os << "\tlayer\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    os << detail::fmt_real(m.weight(i));
    for (double v : m.point(i)) os << '\t' << detail::fmt_real(v);
    os << '\t' << m.tag(i) << '\n';
  }
}

std::vector<double> layer_masses(const DiscreteMeasure& m, int max_tag) {
  std::vector<double> out(max_tag + 1, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const int t = m.tag(i);
    if (t >= 0 && t <= max_tag) out[t] += m.weight(i);
  }
  return out;
}

}  // namespace layered_ot
