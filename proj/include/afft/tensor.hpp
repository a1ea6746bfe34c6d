#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "afft/geometry.hpp"
#include "afft/kdtree.hpp"
#include "afft/parallel.hpp"

namespace afft {

/// One element of the interaction tensor.
struct TensorPoint {
  Point3 position;                 // b, on the bisector surface
  Vec3 provenance;                 // p = (nearest scene-object point) - b
  double raw_weight = 0.0;         // |p|
  double weight = 0.0;             // normalized into [0, 1], 1 = closest contact
  std::uint32_t scene_index = 0;   // index of the nearest scene-object point
};

struct InteractionTensor {
  std::vector<TensorPoint> points;  // sorted lexicographically by position
  Point3 trim_center = Point3::Zero();
  double trim_radius = 0.0;
  double w_min = 0.0;
  double w_max = 0.0;
  double eps = 0.0;  // equidistance tolerance used during construction
};

/// A single training interaction: the query-object in its own frame, the
/// scene-object, and the pose placing the former relative to the latter.
struct InteractionExample {
  PointCloud query_object;
  PointCloud scene_object;
  RigidTransform pose;
  std::string affordance_name;

  PointCloud posed_query() const { return apply_transform(query_object, pose); }
  void validate() const;
};

struct BisectorConfig {
  std::size_t target_count = 4096;
  /// Extra rays per seed point, aimed at random scene points near the nearest one.
  std::size_t jitter_rays = 7;
  /// Radius of the jitter target ball, as a fraction of the trim radius.
  double jitter_radius_fraction = 0.25;
  std::size_t max_batches = 8;
  /// Extra rays per seed point that start beyond it, up to one trim radius
  /// away from a random scene point, and bisect toward the nearer object of
  /// the other kind. They reach the parts of the bisector that lie away from
  /// the contact region.
  std::size_t outward_rays = 4;
};

/// Default equidistance tolerance: 0.5% of the trim radius.
inline double default_bisector_eps(double trim_radius) { return 0.005 * trim_radius; }

/// Points x with |d(x, query) - d(x, scene)| <= eps inside the trim sphere.
/// Each seed point q of `query` casts segments toward its nearest scene point
/// and toward `jitter_rays` random nearby scene points; the distance difference
/// changes sign along every such segment and is bisected to tolerance. Output is
/// sorted lexicographically and deduplicated, and depends only on `seed`.
/// Throws ComputeError("interaction out of range") when nothing fits the trim sphere.
std::vector<Point3> compute_bisector_points(const SceneIndex& query, const SceneIndex& scene,
                                            const Point3& trim_center, double trim_radius, double eps,
                                            std::uint64_t seed, const BisectorConfig& cfg = {},
                                            Exec exec = Exec::Parallel);

std::vector<Point3> compute_bisector_points(const PointCloud& query, const PointCloud& scene,
                                            const Point3& trim_center, double trim_radius, double eps,
                                            std::uint64_t seed, const BisectorConfig& cfg = {},
                                            Exec exec = Exec::Parallel);

/// Weighted interaction tensor of a training example. The trim sphere is
/// centred on the posed query-object bounding box with radius equal to its
/// diagonal. eps <= 0 selects default_bisector_eps.
InteractionTensor compute_tensor(const InteractionExample& example, double eps, std::uint64_t seed,
                                 const BisectorConfig& cfg = {}, Exec exec = Exec::Parallel);

/// w_i = 1 - (raw_i - min) / (max - min); all ones when max == min.
std::vector<double> normalize_weights(std::span<const double> raw);

}  // namespace afft
