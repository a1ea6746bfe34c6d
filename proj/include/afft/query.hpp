#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "afft/descriptor.hpp"
#include "afft/geometry.hpp"
#include "afft/kdtree.hpp"
#include "afft/parallel.hpp"

namespace afft {

struct QueryConfig {
  double sample_fraction = 0.30;
  std::size_t orientations = 8;
  double theta_max = M_PI / 18.0;
  double c = 5.0;
  double normal_tolerance = M_PI / 12.0;
  Vec3 up_vector = Vec3::UnitZ();
  std::optional<double> nms_radius;
  std::uint64_t seed = 0;
  bool early_exit = true;
  std::size_t normal_neighbors = 16;
  double weight_floor = 1e-6;        // guards W = w_max / w_i against w_i -> 0
  double max_permissiveness = 10.0;  // cap on W

  void validate() const;
};

struct Prediction {
  Point3 location = Point3::Zero();
  std::size_t orientation_index = 0;
  double theta = 0.0;
  double score = 0.0;
  std::size_t keypoints_evaluated = 0;
  std::uint32_t scene_index = 0;
};

struct HeatmapEntry {
  Point3 location = Point3::Zero();
  double score = 0.0;
  std::uint32_t scene_index = 0;
};

struct AffordanceHeatmap {
  std::vector<HeatmapEntry> entries;  // one per tested scene point, in sampling order
};

struct QueryStats {
  std::size_t sampled = 0;
  std::size_t pruned = 0;
  std::size_t accepted = 0;
  bool scale_warning = false;  // d_o exceeds the scene bounding-box diagonal
};

struct QueryResult {
  std::vector<Prediction> predictions;  // score desc, then location lexicographic
  AffordanceHeatmap heatmap;
  QueryStats stats;
};

struct AlignmentScore {
  double score = 0.0;                 // normalized raw / 2N
  std::size_t keypoints_evaluated = 0;
  bool accepted = false;              // score would reach s_aff under full evaluation
};

/// Per-keypoint permissiveness W = w_max / max(w, floor), capped.
double keypoint_permissiveness(double w_max, double w, const QueryConfig& cfg);

/// Angle test then (only if it passed) magnitude test for one keypoint.
/// Returns the keypoint's contribution in {0, 1, 2}.
int keypoint_contribution(const Vec3& expected, const Vec3& observed, double permissiveness,
                          const QueryConfig& cfg);

/// Alignment quality of the descriptor posed by `pose` against a local scene
/// neighbourhood. Keypoints are visited in descending weight. With early_exit
/// the loop stops as soon as the accept/reject decision is fixed and the
/// returned score is the partial one at that point.
AlignmentScore score_alignment(const AffordanceDescriptor& descriptor, const SceneIndex& local_index,
                               const RigidTransform& pose, const QueryConfig& cfg, bool early_exit);
AlignmentScore score_alignment(const AffordanceDescriptor& descriptor, const BallView& local,
                               const RigidTransform& pose, const QueryConfig& cfg, bool early_exit);

/// Like score_alignment(early_exit=true) for the decision and
/// keypoints_evaluated, but accepted poses are completed to their full score.
AlignmentScore score_alignment_ranked(const AffordanceDescriptor& descriptor, const SceneIndex& local_index,
                                      const RigidTransform& pose, const QueryConfig& cfg);
AlignmentScore score_alignment_ranked(const AffordanceDescriptor& descriptor, const BallView& local,
                                      const RigidTransform& pose, const QueryConfig& cfg);

/// A sampled scene point and the outcome of normal pruning.
struct Candidate {
  std::uint32_t scene_index = 0;
  Point3 location = Point3::Zero();
  Vec3 normal = Vec3::UnitZ();
  bool passed = false;
};

/// The affordance's expected normal expressed in a scene whose up direction is `up`.
Vec3 expected_scene_normal(const Vec3& n_aff, const Vec3& up);

/// Samples ceil(sample_fraction * |scene|) points without replacement and
/// prunes those whose estimated normal is invalid or deviates from
/// `expected_normal` by more than cfg.normal_tolerance. Scene normals, when
/// present, only disambiguate the sign of the estimate; otherwise the up vector does.
std::vector<Candidate> generate_candidates(const PointCloud& scene, const SceneIndex& index,
                                           const Vec3& expected_normal, const QueryConfig& cfg,
                                           Exec exec = Exec::Parallel);

/// Pose mapping the descriptor frame onto the scene: anchor -> location,
/// descriptor +z -> normal, then a turn of theta about the normal.
RigidTransform candidate_pose(const Vec3& n_aff, const Point3& location, const Vec3& normal, double theta,
                              const QueryConfig& cfg);

/// Scores one posed alignment against the radius-d_o neighbourhood of a candidate.
using PoseScorer = std::function<AlignmentScore(const BallView& local, const RigidTransform& pose,
                                                std::uint32_t scene_index, std::size_t orientation)>;

/// Shared candidate loop of the main method and the baselines: sampling,
/// pruning, neighbourhood extraction of radius d_o, orientation sweep.
QueryResult evaluate_candidates(const PointCloud& scene, const Vec3& n_aff, double d_o, const QueryConfig& cfg,
                                const PoseScorer& scorer, Exec exec = Exec::Parallel);

QueryResult run_query(const AffordanceDescriptor& descriptor, const PointCloud& scene, const QueryConfig& cfg,
                      Exec exec = Exec::Parallel);

/// Greedy suppression by descending score: drops predictions closer than
/// `radius` to an already kept one. radius 0 only sorts.
std::vector<Prediction> non_maximum_suppression(std::vector<Prediction> preds, double radius);

/// Score desc, then location lexicographic, then orientation.
void sort_predictions(std::vector<Prediction>& preds);

}  // namespace afft
