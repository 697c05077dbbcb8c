#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "layered_ot/geometry.hpp"

namespace layered_ot {

/// An affine piece of the target: anchor + span(basis), with unit normal.
struct Layer {
  int index = 1;
  double offset = 0.0;
  Point anchor;
  std::vector<Point> basis;
  Point normal;

  /// Throws ConfigError unless basis is orthonormal and normal is a unit
  /// vector orthogonal to the basis (tolerance 1e-12).
  void validate() const;
};

/// Ordered union of layers. `partition_order[r]` is the index of the layer
/// with rank r, so rank 0 plays the role of Y_1.
class LayeredSpace {
 public:
  LayeredSpace() = default;
  explicit LayeredSpace(std::vector<Layer> layers, std::vector<int> partition_order = {});

  const std::vector<Layer>& layers() const { return layers_; }
  const std::vector<int>& partition_order() const { return order_; }
  std::size_t size() const { return layers_.size(); }

  /// Rank in the ordered partition of the layer carrying `index`; throws
  /// DataError for an unknown index.
  int rank_of(int index) const;
  const Layer& layer(int index) const;

 private:
  std::vector<Layer> layers_;
  std::vector<int> order_;
};

/// Weighted point cloud. Optional per-point data: layer tag (-1 = untagged),
/// atom flag, and the unit normal of the piece the point sits on (empty when
/// the point is interior to a full-dimensional region).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(std::vector<Point> points, std::vector<double> weights,
                  std::vector<int> layer_tags = {}, std::vector<char> atoms = {},
                  std::vector<Point> normals = {});

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.empty() ? 0 : points_.front().size(); }
  const Point& point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  bool has_tags() const { return !tags_.empty(); }
  int tag(std::size_t i) const { return tags_.empty() ? -1 : tags_[i]; }
  bool is_atom(std::size_t i) const { return !atoms_.empty() && atoms_[i] != 0; }
  bool has_normal(std::size_t i) const { return !normals_.empty() && !normals_[i].empty(); }
  const Point& normal(std::size_t i) const { return normals_[i]; }

 private:
  std::vector<Point> points_;
  std::vector<double> weights_;
  std::vector<int> tags_;
  std::vector<char> atoms_;
  std::vector<Point> normals_;
};

enum class Perturbation {
  none,
  /// Smooth random density factors in [1-a, 1+a].
  continuous,
  /// Target atoms are random positive integer multiples of the (uniform)
  /// source cell mass.
  quantized,
};

Perturbation parse_perturbation(const std::string& s);
std::string to_string(Perturbation p);

struct LayeredScenario {
  DiscreteMeasure source;
  DiscreteMeasure target;
  LayeredSpace space;
};

struct LayeredScenarioParams {
  int K = 2;
  int n = 1;
  int grid = 20;
  /// Cells per axis in each target layer; 0 means `grid`.
  int target_grid = 0;
  std::uint64_t seed = 1;
  /// Layer masses; empty means uniform.
  std::vector<double> t;
  /// Last-coordinate values of the layers; empty means 1, 2, ..., K.
  std::vector<double> offsets;
  double source_offset = 0.0;
  Perturbation perturb = Perturbation::none;
  double amplitude = 0.5;
  /// Replace layer 1 by a single atom at its centre.
  bool atomic_first_layer = false;
  /// Target points move uniformly within the middle `jitter` fraction of
  /// their cell (0 keeps cell centres).
  double jitter = 0.0;
};

/// Source: uniform cells of [0,1]^n x {x̄}. Layer k: cells of [0,1]^n on the
/// hyperplane x_{n+1} = offset_k, shifted by k/(K*target_grid) of a cell so
/// that different layers never share projected positions.
LayeredScenario make_layered_scenario(const LayeredScenarioParams& params);
LayeredScenario make_layered_scenario(int K, int n, int grid, std::uint64_t seed,
                                      const std::vector<double>& t);

struct ThreeMarginalScenarioParams {
  int K = 2;
  int L = 2;
  int n = 1;
  int grid = 12;
  /// Cells per axis in each Y and Z layer; 0 means `grid`.
  int target_grid = 0;
  std::uint64_t seed = 1;
  std::vector<double> t;
  std::vector<double> s;
  /// Empty means 1..K for Y and -1..-L for Z.
  std::vector<double> y_offsets;
  std::vector<double> z_offsets;
  Perturbation perturb = Perturbation::none;
  double amplitude = 0.5;
  double jitter = 0.0;
};

struct ThreeMarginalScenario {
  DiscreteMeasure x;
  DiscreteMeasure y;
  DiscreteMeasure z;
  LayeredSpace y_space;
  LayeredSpace z_space;
};

/// X = cells of [0,1]^n x {0}; Y and Z are layered like the target of
/// make_layered_scenario, generated from independent seeds.
ThreeMarginalScenario make_three_marginal_scenario(const ThreeMarginalScenarioParams& params);

struct PlaneSpec {
  Point anchor;
  Point normal;
};

struct TiltedScenarioParams {
  int n = 1;
  int grid = 20;
  int target_grid = 0;
  std::uint64_t seed = 1;
  PlaneSpec source;
  std::vector<PlaneSpec> layers;
  std::vector<double> t;
  Perturbation perturb = Perturbation::none;
  double amplitude = 0.5;
  double jitter = 0.0;
};

/// Unit cubes parametrized on arbitrary hyperplanes of R^{n+1}.
LayeredScenario make_tilted_scenario(const TiltedScenarioParams& params);

/// [0,1]x{0} against the two atoms (1,1) and (1,-1).
LayeredScenario make_counterexample_atomic(int grid = 100);

struct PerpendicularScenario {
  DiscreteMeasure source;
  DiscreteMeasure target;
};

/// [0,1]x{0} against {0}x[0,1], both uniform.
PerpendicularScenario make_counterexample_perpendicular(int grid = 10);

enum class ShapeKind { ball, ellipsoid, box, annulus };

struct Shape {
  ShapeKind kind = ShapeKind::ball;
  /// Semi-axes; the dimension is axes.size() (2 or 3).
  std::vector<double> axes{1.0, 1.0};
  /// Inner radius, annulus only.
  double inner = 0.0;

  static Shape ball(int dim, double radius = 1.0);
  static Shape ellipsoid(std::vector<double> semi_axes);
};

enum class Region { interior, boundary };

struct MixedMeasureSpec {
  std::function<double(const Point&)> interior_density;
  std::function<double(const Point&)> boundary_density;
  double split = 0.5;
  /// Boundary node count (2D) or latitude band count (3D); 0 means 2*grid.
  int boundary_nodes = 0;
  /// Interior points move uniformly within the middle `jitter` fraction of
  /// their cell, seeded by `seed`.
  double jitter = 0.0;
  std::uint64_t seed = 1;
};

struct MixedScenario {
  DiscreteMeasure measure;
  std::vector<Region> region;
  /// Outward unit normal for boundary points, empty for interior points.
  std::vector<Point> boundary_normal;
};

/// Interior: cell centres of a grid^d box that fall strictly inside the
/// shape. Boundary: equal-angle nodes (2D) or equal-area latitude bands (3D),
/// mapped onto the ellipsoid.
MixedScenario make_mixed_boundary_scenario(const MixedMeasureSpec& spec, const Shape& shape,
                                           int grid);

enum class FanInterior {
  /// Interior cell x goes to its own atom at dilation * x.
  dilated,
  /// Interior mass joins the ray nearest in angle.
  shared,
};

struct RadialFanSpec {
  FanInterior interior = FanInterior::dilated;
  double dilation = 1.25;
  /// Distances beyond dilation * x_b along the outward normal.
  double r_min = 0.5;
  double r_max = 1.5;
  int points_per_ray = 4;
  /// Integer multiples of the interior cell mass on both sides.
  bool quantized = true;
  std::uint64_t seed = 1;
};

struct BoundaryFanScenario {
  MixedScenario source;
  DiscreteMeasure target;
  /// Interior mass after quantization (equals spec.split when exact).
  double split = 0.0;
};

/// Targets on the outward normal rays dilation * x_b + rho * n_b of the
/// boundary nodes, `points_per_ray` radii each. Ray b carries the mass of node b,
/// plus the interior cells nearest in angle in `shared` mode; in `dilated` mode the
/// interior keeps one atom per cell. Quantization rounds boundary node masses to
/// whole interior units and needs a uniform interior density.
BoundaryFanScenario make_boundary_fan_scenario(const MixedMeasureSpec& spec, const Shape& shape,
                                               int grid, const RadialFanSpec& fan);

/// `weight<TAB>coord_0<TAB>...<TAB>coord_n<TAB>layer`, one point per line.
void write_measure_tsv(std::ostream& os, const DiscreteMeasure& m);

/// Sum of weights per layer tag, indexed by tag.
std::vector<double> layer_masses(const DiscreteMeasure& m, int max_tag);

}  // namespace layered_ot
