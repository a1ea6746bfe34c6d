#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afft/geometry.hpp"
#include "afft/tensor.hpp"

namespace afft {

enum class SamplingMethod { Uniform, WeightDriven };

std::string_view to_string(SamplingMethod m);
SamplingMethod parse_sampling_method(std::string_view s);  // "uniform" | "weighted"

/// 6-D feature (bisector position + provenance vector) with its weight.
struct AffordanceKeypoint {
  Point3 position;
  Vec3 provenance;
  double weight = 0.0;
};

/// Training geometry carried along with a descriptor, expressed in the
/// descriptor frame. Needed by the baselines and by the validation oracles.
struct TrainingBundle {
  std::vector<Point3> query_object;
  std::vector<Point3> scene_object;
  std::vector<Point3> bisector;
  double eps = 0.0;
};

/// Keypoints are stored in the descriptor frame: origin at the anchor (the
/// scene contact point closest to the query object) and +z along n_aff.
struct AffordanceDescriptor {
  std::string affordance_name;
  std::vector<AffordanceKeypoint> keypoints;  // descending weight
  Vec3 n_aff = Vec3::UnitZ();
  double d_o = 0.0;
  Point3 anchor = Point3::Zero();  // training scene coordinates
  std::string query_object_ref;
  double s_aff = 0.5;
  double w_max_norm = 1.0;
  SamplingMethod method = SamplingMethod::WeightDriven;
  std::uint64_t seed = 0;
  std::optional<TrainingBundle> bundle;

  std::size_t size() const { return keypoints.size(); }

  /// Training scene -> descriptor frame.
  RigidTransform frame() const;

  /// Throws InputError when an invariant does not hold.
  void validate() const;
};

struct SamplingProbabilities {
  std::vector<double> values;
  bool uniform_fallback = false;  // set when every weight was zero
};

/// P_i = w_i / sum(w).
SamplingProbabilities sampling_probabilities(std::span<const double> weights);

struct DescriptorOptions {
  SamplingMethod method = SamplingMethod::WeightDriven;
  std::size_t n = 512;
  Vec3 n_aff = Vec3::UnitZ();
  double s_aff = 0.5;
  std::uint64_t seed = 0;
  std::string query_object_ref;
  bool bundle = true;
};

/// Draws n keypoints without replacement from the tensor. WeightDriven uses
/// sequential weighted draws, renormalizing over the remaining points.
AffordanceDescriptor sample_descriptor(const InteractionTensor& tensor, const InteractionExample& example,
                                       const DescriptorOptions& opts);

/// Outcome of one brute-force check of a descriptor against its bundled source.
struct SourceCheck {
  std::string name;
  bool passed = true;
  std::size_t failures = 0;
  std::string detail;  // first offending item
};

/// Checks keypoint order and weight range, then (when a bundle is present)
/// equidistance of every keypoint and bisector point, and that each b + p is
/// the brute-force nearest scene-object point.
std::vector<SourceCheck> check_against_source(const AffordanceDescriptor& descriptor, double tol = 1e-9);

/// Built-in expected scene normal for the known affordances; nullopt otherwise.
std::optional<Vec3> default_n_aff(std::string_view affordance);

/// Rotation taking n_aff onto +z, the orientation part of the descriptor frame.
RigidTransform descriptor_rotation(const Vec3& n_aff);

}  // namespace afft
