#include "afft/query.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "afft/error.hpp"
#include "afft/normals.hpp"
#include "afft/rng.hpp"
#include "afft/sampling.hpp"

namespace afft {

void QueryConfig::validate() const {
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) throw InputError("sample fraction must lie in (0, 1]");
  if (orientations < 1) throw InputError("at least one orientation is required");
  if (!(theta_max > 0.0) || !(c > 0.0)) throw InputError("theta_max and c must be positive");
  if (!(normal_tolerance >= 0.0)) throw InputError("normal tolerance must be non-negative");
  if (!(up_vector.norm() > 0.0) || !is_finite(up_vector)) throw InputError("up vector must be non-zero");
  if (nms_radius && !(*nms_radius >= 0.0)) throw InputError("nms radius must be non-negative");
  if (normal_neighbors < 3) throw InputError("normal estimation needs at least 3 neighbours");
}

double keypoint_permissiveness(double w_max, double w, const QueryConfig& cfg) {
  if (!(w_max > 0.0)) return 1.0;
  return std::min(w_max / std::max(w, cfg.weight_floor), cfg.max_permissiveness);
}

int keypoint_contribution(const Vec3& expected, const Vec3& observed, double permissiveness,
                          const QueryConfig& cfg) {
  if (angle_between(expected, observed) > permissiveness * cfg.theta_max) return 0;
  const double expected_len = expected.norm();
  const bool magnitude_ok = std::abs(expected_len - observed.norm()) <= permissiveness * expected_len / cfg.c;
  return magnitude_ok ? 2 : 1;
}

namespace {

enum class ScoreMode { Full, EarlyExit, Ranked };

/// Smallest integer raw score m with m / total >= s_aff, using the same
/// division the final decision uses.
std::size_t required_raw(double s_aff, std::size_t total) {
  auto needed = static_cast<std::size_t>(std::ceil(s_aff * static_cast<double>(total)));
  while (needed > 0 && static_cast<double>(needed - 1) / static_cast<double>(total) >= s_aff) --needed;
  while (static_cast<double>(needed) / static_cast<double>(total) < s_aff) ++needed;
  return needed;
}

template <class Local>
AlignmentScore score_impl(const AffordanceDescriptor& d, const Local& local, const RigidTransform& pose,
                          const QueryConfig& cfg, ScoreMode mode) {
  AlignmentScore out;
  const std::size_t n = d.keypoints.size();
  if (n == 0) return out;
  const std::size_t total = 2 * n;
  const std::size_t needed = required_raw(d.s_aff, total);

  std::size_t raw = 0;
  bool decided = false;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& kp = d.keypoints[k];
    const Point3 b = pose.apply(kp.position);
    const Vec3 p = pose.rotate(kp.provenance);
    const Neighbor nn = local.nearest(b);
    if (std::isfinite(nn.squared_distance)) {
      const Vec3 v = local.point(nn.index) - b;
      raw += static_cast<std::size_t>(
          keypoint_contribution(p, v, keypoint_permissiveness(d.w_max_norm, kp.weight, cfg), cfg));
    }

    if (decided) continue;
    const std::size_t evaluated = k + 1;
    const bool success = raw >= needed;
    const bool hopeless = raw + 2 * (n - evaluated) < needed;
    if (!success && !hopeless) continue;
    decided = true;
    out.accepted = success;
    out.keypoints_evaluated = evaluated;
    if (mode == ScoreMode::EarlyExit || (mode == ScoreMode::Ranked && hopeless)) {
      out.score = static_cast<double>(raw) / static_cast<double>(total);
      return out;
    }
  }
  out.score = static_cast<double>(raw) / static_cast<double>(total);
  out.accepted = raw >= needed;
  if (mode == ScoreMode::Full) out.keypoints_evaluated = n;
  return out;
}

bool location_less(const Point3& a, const Point3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

}  // namespace

AlignmentScore score_alignment(const AffordanceDescriptor& descriptor, const SceneIndex& local_index,
                               const RigidTransform& pose, const QueryConfig& cfg, bool early_exit) {
  return score_impl(descriptor, local_index, pose, cfg, early_exit ? ScoreMode::EarlyExit : ScoreMode::Full);
}

AlignmentScore score_alignment_ranked(const AffordanceDescriptor& descriptor, const SceneIndex& local_index,
                                      const RigidTransform& pose, const QueryConfig& cfg) {
  return score_impl(descriptor, local_index, pose, cfg, ScoreMode::Ranked);
}

AlignmentScore score_alignment(const AffordanceDescriptor& descriptor, const BallView& local,
                               const RigidTransform& pose, const QueryConfig& cfg, bool early_exit) {
  return score_impl(descriptor, local, pose, cfg, early_exit ? ScoreMode::EarlyExit : ScoreMode::Full);
}

AlignmentScore score_alignment_ranked(const AffordanceDescriptor& descriptor, const BallView& local,
                                      const RigidTransform& pose, const QueryConfig& cfg) {
  return score_impl(descriptor, local, pose, cfg, ScoreMode::Ranked);
}

Vec3 expected_scene_normal(const Vec3& n_aff, const Vec3& up) {
  return rotation_between(Vec3::UnitZ(), up).rotate(n_aff).normalized();
}

std::vector<Candidate> generate_candidates(const PointCloud& scene, const SceneIndex& index,
                                           const Vec3& expected_normal, const QueryConfig& cfg, Exec exec) {
  const std::size_t n = scene.size();
  const auto m = static_cast<std::size_t>(std::ceil(cfg.sample_fraction * static_cast<double>(n)));
  Rng rng(mix_seed(cfg.seed, 0xCA7D));
  const auto picks = sample_without_replacement(n, m, rng);
  const Vec3 up = cfg.up_vector.normalized();

  std::vector<Candidate> out(picks.size());
  auto body = [&](std::ptrdiff_t i) {
    Candidate& c = out[i];
    c.scene_index = picks[i];
    c.location = scene.points[c.scene_index];
    const Vec3& hint = scene.has_normals() ? scene.normals[c.scene_index] : up;
    const auto normal = estimate_normal_at(index, c.location, cfg.normal_neighbors, hint);
    if (!normal) return;
    c.normal = *normal;
    c.passed = angle_between(c.normal, expected_normal) <= cfg.normal_tolerance;
  };
  const auto count = static_cast<std::ptrdiff_t>(out.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
  }
  return out;
}

RigidTransform candidate_pose(const Vec3& n_aff, const Point3& location, const Vec3& normal, double theta,
                              const QueryConfig& cfg) {
  const RigidTransform to_scene_up = rotation_between(Vec3::UnitZ(), cfg.up_vector);
  const Vec3 expected = to_scene_up.rotate(n_aff);
  const RigidTransform align = rotation_between(expected, normal);
  const RigidTransform turn = rotation_about_axis(normal, theta);
  const RigidTransform from_descriptor = descriptor_rotation(n_aff).inverse();
  RigidTransform pose = turn * align * to_scene_up * from_descriptor;
  pose.translation = location;
  return pose;
}

QueryResult evaluate_candidates(const PointCloud& scene, const Vec3& n_aff, double d_o, const QueryConfig& cfg,
                                const PoseScorer& scorer, Exec exec) {
  cfg.validate();
  if (scene.empty()) throw InputError("scene is empty");
  scene.validate();

  QueryResult result;
  const SceneIndex index(scene);
  if (d_o > bounding_box_diagonal(scene)) {
    result.stats.scale_warning = true;
    std::cerr << "warning: descriptor extent " << d_o
              << " exceeds the scene bounding-box diagonal; check units\n";
  }

  const Vec3 expected = expected_scene_normal(n_aff, cfg.up_vector);
  const auto candidates = generate_candidates(scene, index, expected, cfg, exec);
  const double step = 2.0 * M_PI / static_cast<double>(cfg.orientations);

  std::vector<std::vector<Prediction>> found(candidates.size());
  result.heatmap.entries.resize(candidates.size());
  auto body = [&](std::ptrdiff_t i) {
    const Candidate& c = candidates[i];
    HeatmapEntry& heat = result.heatmap.entries[i];
    heat.location = c.location;
    heat.scene_index = c.scene_index;
    if (!c.passed) return;
    const BallView local(index, c.location, d_o);
    for (std::size_t o = 0; o < cfg.orientations; ++o) {
      const double theta = static_cast<double>(o) * step;
      const RigidTransform pose = candidate_pose(n_aff, c.location, c.normal, theta, cfg);
      const AlignmentScore s = scorer(local, pose, c.scene_index, o);
      heat.score = std::max(heat.score, s.score);
      if (s.accepted) found[i].push_back({c.location, o, theta, s.score, s.keypoints_evaluated, c.scene_index});
    }
  };
  const auto count = static_cast<std::ptrdiff_t>(candidates.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
  }

  result.stats.sampled = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!candidates[i].passed) ++result.stats.pruned;
    result.predictions.insert(result.predictions.end(), found[i].begin(), found[i].end());
  }
  result.stats.accepted = result.predictions.size();
  sort_predictions(result.predictions);
  if (cfg.nms_radius) result.predictions = non_maximum_suppression(std::move(result.predictions), *cfg.nms_radius);
  return result;
}

QueryResult run_query(const AffordanceDescriptor& descriptor, const PointCloud& scene, const QueryConfig& cfg,
                      Exec exec) {
  descriptor.validate();
  const PoseScorer scorer = [&](const BallView& local, const RigidTransform& pose, std::uint32_t, std::size_t) {
    return cfg.early_exit ? score_alignment_ranked(descriptor, local, pose, cfg)
                          : score_alignment(descriptor, local, pose, cfg, false);
  };
  return evaluate_candidates(scene, descriptor.n_aff, descriptor.d_o, cfg, scorer, exec);
}

void sort_predictions(std::vector<Prediction>& preds) {
  std::sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.location != b.location) return location_less(a.location, b.location);
    return a.orientation_index < b.orientation_index;
  });
}

std::vector<Prediction> non_maximum_suppression(std::vector<Prediction> preds, double radius) {
  if (!(radius >= 0.0)) throw InputError("nms radius must be non-negative");
  sort_predictions(preds);
  if (radius == 0.0) return preds;
  const double r2 = radius * radius;
  std::vector<Prediction> kept;
  for (const auto& p : preds) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Prediction& k) {
      return squared_distance(k.location, p.location) < r2;
    });
    if (!suppressed) kept.push_back(p);
  }
  return kept;
}

}  // namespace afft
