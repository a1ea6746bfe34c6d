#include "afft/baselines.hpp"

#include <algorithm>
#include <limits>
#include <optional>

#include "afft/error.hpp"
#include "afft/rng.hpp"
#include "afft/sampling.hpp"
#include "afft/tensor.hpp"

namespace afft {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const TrainingBundle& require_bundle(const AffordanceDescriptor& d) {
  if (!d.bundle) throw InputError("descriptor has no training source; baselines need it");
  return *d.bundle;
}

/// Training neighbourhood of radius d_o around the anchor, in the descriptor frame.
SceneIndex reference_neighbourhood(const AffordanceDescriptor& d) {
  const TrainingBundle& b = require_bundle(d);
  const SceneIndex full(b.scene_object);
  std::vector<Point3> pts;
  for (auto i : full.within_radius(Point3::Zero(), d.d_o)) pts.push_back(b.scene_object[i]);
  return SceneIndex(std::move(pts));
}

/// Local index of the view, rebuilt only when the candidate changes; the
/// orientation sweep of one candidate runs on a single thread.
const SceneIndex* cached_local(const BallView& view) {
  thread_local std::optional<SceneIndex> index;
  thread_local Point3 center = Point3::Constant(std::numeric_limits<double>::quiet_NaN());
  thread_local double radius = -1.0;
  thread_local const Point3* origin = nullptr;
  const Point3* first = &view.point(0);
  if (!(view.center() == center) || view.radius() != radius || first != origin) {
    auto pts = view.gather();
    index.reset();
    if (!pts.empty()) index.emplace(std::move(pts));
    center = view.center();
    radius = view.radius();
    origin = first;
  }
  return index ? &*index : nullptr;
}

AlignmentScore threshold_score(double rmse, double threshold, std::size_t evaluated) {
  AlignmentScore s;
  s.keypoints_evaluated = evaluated;
  s.accepted = rmse <= threshold;
  s.score = std::isfinite(rmse) ? std::max(0.0, 1.0 - rmse / threshold) : 0.0;
  return s;
}

}  // namespace

std::vector<Point3> subsample_points(std::span<const Point3> points, std::size_t count, std::uint64_t seed) {
  if (points.size() <= count) return {points.begin(), points.end()};
  Rng rng(seed);
  auto idx = sample_without_replacement(points.size(), count, rng);
  std::sort(idx.begin(), idx.end());
  std::vector<Point3> out;
  out.reserve(count);
  for (auto i : idx) out.push_back(points[i]);
  return out;
}

double bisector_similarity_rmse(const AffordanceDescriptor& descriptor, const SceneIndex& local,
                                const RigidTransform& pose, const BaselineConfig& cfg) {
  const TrainingBundle& b = require_bundle(descriptor);
  if (local.size() == 0) return kInf;
  const auto posed_query = apply_transform(std::span<const Point3>(b.query_object), pose);
  const Aabb box = bounding_box(posed_query);
  const SceneIndex query_index(posed_query);

  BisectorConfig bc;
  bc.target_count = cfg.test_bisector_points;
  std::vector<Point3> test;
  try {
    test = compute_bisector_points(query_index, local, box.center(), descriptor.d_o, b.eps,
                                   mix_seed(cfg.seed, 0xB15), bc, Exec::Serial);
  } catch (const ComputeError&) {
    return kInf;
  }
  const auto source = subsample_points(b.bisector, cfg.max_source_points, mix_seed(cfg.seed, 0x50));
  try {
    const SceneIndex target(std::move(test));
    return icp_point_to_point(source, target, pose, cfg.max_iterations, cfg.convergence_eps).rmse;
  } catch (const ComputeError&) {
    return kInf;
  }
}

double naive_icp_rmse(const AffordanceDescriptor& descriptor, const SceneIndex& local, const RigidTransform& pose,
                      const BaselineConfig& cfg) {
  const TrainingBundle& b = require_bundle(descriptor);
  if (local.size() == 0) return kInf;
  const auto source = subsample_points(b.query_object, cfg.max_source_points, mix_seed(cfg.seed, 0x51));
  try {
    return icp_point_to_point(source, local, pose, cfg.max_iterations, cfg.convergence_eps).rmse;
  } catch (const ComputeError&) {
    return kInf;
  }
}

double reference_bisector_rmse(const AffordanceDescriptor& descriptor, const BaselineConfig& cfg) {
  return bisector_similarity_rmse(descriptor, reference_neighbourhood(descriptor), RigidTransform::identity(), cfg);
}

double reference_naive_rmse(const AffordanceDescriptor& descriptor, const BaselineConfig& cfg) {
  return naive_icp_rmse(descriptor, reference_neighbourhood(descriptor), RigidTransform::identity(), cfg);
}

QueryResult bs_baseline_query(const AffordanceDescriptor& descriptor, const PointCloud& scene, const QueryConfig& cfg,
                              double threshold, const BaselineConfig& bcfg, Exec exec) {
  descriptor.validate();
  if (!(threshold > 0.0)) threshold = kBisectorThresholdFactor * reference_bisector_rmse(descriptor, bcfg);
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw ComputeError("bisector baseline threshold unavailable");
  const PoseScorer scorer = [&](const BallView& view, const RigidTransform& pose, std::uint32_t, std::size_t) {
    const SceneIndex* local = cached_local(view);
    const double rmse = local ? bisector_similarity_rmse(descriptor, *local, pose, bcfg) : kInf;
    return threshold_score(rmse, threshold, 0);
  };
  return evaluate_candidates(scene, descriptor.n_aff, descriptor.d_o, cfg, scorer, exec);
}

QueryResult naive_baseline_query(const AffordanceDescriptor& descriptor, const PointCloud& scene,
                                 const QueryConfig& cfg, double threshold, const BaselineConfig& bcfg, Exec exec) {
  descriptor.validate();
  if (!(threshold > 0.0)) threshold = kNaiveThresholdFactor * reference_naive_rmse(descriptor, bcfg);
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw ComputeError("naive baseline threshold unavailable");
  const PoseScorer scorer = [&](const BallView& view, const RigidTransform& pose, std::uint32_t, std::size_t) {
    const SceneIndex* local = cached_local(view);
    const double rmse = local ? naive_icp_rmse(descriptor, *local, pose, bcfg) : kInf;
    return threshold_score(rmse, threshold, 0);
  };
  return evaluate_candidates(scene, descriptor.n_aff, descriptor.d_o, cfg, scorer, exec);
}

}  // namespace afft
