#include "afft/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "afft/error.hpp"
#include "afft/rng.hpp"
#include "afft/sampling.hpp"

namespace afft {

std::string_view to_string(SamplingMethod m) {
  return m == SamplingMethod::Uniform ? "uniform" : "weighted";
}

SamplingMethod parse_sampling_method(std::string_view s) {
  if (s == "uniform") return SamplingMethod::Uniform;
  if (s == "weighted" || s == "weight-driven") return SamplingMethod::WeightDriven;
  throw InputError("unknown sampling method '" + std::string(s) + "'");
}

RigidTransform descriptor_rotation(const Vec3& n_aff) { return rotation_between(n_aff, Vec3::UnitZ()); }

RigidTransform AffordanceDescriptor::frame() const {
  const RigidTransform r = descriptor_rotation(n_aff);
  return r * RigidTransform::from_translation(-anchor);
}

void AffordanceDescriptor::validate() const {
  if (keypoints.empty()) throw InputError("descriptor has no keypoints");
  if (!is_finite(n_aff) || std::abs(n_aff.norm() - 1.0) > 1e-6) throw InputError("n_aff must be a unit vector");
  if (!(d_o > 0.0) || !std::isfinite(d_o)) throw InputError("d_o must be positive");
  if (!(s_aff > 0.0 && s_aff <= 1.0)) throw InputError("s_aff must lie in (0, 1]");
  if (!is_finite(anchor)) throw InputError("anchor is not finite");
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    const auto& k = keypoints[i];
    if (!is_finite(k.position) || !is_finite(k.provenance) || !(k.weight >= 0.0 && k.weight <= 1.0))
      throw InputError("keypoint " + std::to_string(i) + " is malformed");
    if (i > 0 && k.weight > keypoints[i - 1].weight)
      throw InputError("keypoints are not in descending weight order");
  }
}

SamplingProbabilities sampling_probabilities(std::span<const double> weights) {
  if (weights.empty()) throw InputError("no weights to normalize");
  SamplingProbabilities out;
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("weights must be finite and non-negative");
    total += w;
  }
  out.values.resize(weights.size());
  if (total <= 0.0) {
    out.uniform_fallback = true;
    std::fill(out.values.begin(), out.values.end(), 1.0 / static_cast<double>(weights.size()));
    return out;
  }
  for (std::size_t i = 0; i < weights.size(); ++i) out.values[i] = weights[i] / total;
  return out;
}

namespace {

std::vector<std::uint32_t> weighted_draws(std::span<const double> weights, std::size_t n, Rng& rng) {
  std::vector<double> remaining(weights.begin(), weights.end());
  std::vector<char> taken(weights.size(), 0);
  std::vector<std::uint32_t> picked;
  picked.reserve(n);
  for (std::size_t draw = 0; draw < n; ++draw) {
    double total = 0.0;
    for (double w : remaining) total += w;
    std::size_t choice = remaining.size();
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < remaining.size(); ++i) {
        if (remaining[i] <= 0.0) continue;
        acc += remaining[i];
        choice = i;
        if (target < acc) break;
      }
    } else {
      // Only zero-weight points remain: uniform over them.
      std::size_t free = 0;
      for (char t : taken) free += t ? 0 : 1;
      std::size_t k = rng.below(free);
      for (std::size_t i = 0; i < taken.size(); ++i) {
        if (taken[i]) continue;
        if (k-- == 0) {
          choice = i;
          break;
        }
      }
    }
    picked.push_back(static_cast<std::uint32_t>(choice));
    taken[choice] = 1;
    remaining[choice] = 0.0;
  }
  return picked;
}

}  // namespace

AffordanceDescriptor sample_descriptor(const InteractionTensor& tensor, const InteractionExample& example,
                                       const DescriptorOptions& opts) {
  if (opts.n == 0) throw InputError("descriptor size must be at least 1");
  if (opts.n > tensor.points.size())
    throw InputError("descriptor size " + std::to_string(opts.n) + " exceeds tensor size " +
                     std::to_string(tensor.points.size()));
  if (!(opts.n_aff.norm() > 0.0)) throw InputError("n_aff must be non-zero");

  AffordanceDescriptor d;
  d.affordance_name = example.affordance_name;
  d.n_aff = opts.n_aff.normalized();
  d.d_o = tensor.trim_radius;
  d.s_aff = opts.s_aff;
  d.method = opts.method;
  d.seed = opts.seed;
  d.query_object_ref = opts.query_object_ref;

  // Anchor: the scene point nearest to the bisector, i.e. the tightest contact.
  const auto closest = std::min_element(tensor.points.begin(), tensor.points.end(),
                                        [](const TensorPoint& a, const TensorPoint& b) {
                                          return a.raw_weight < b.raw_weight;
                                        });
  d.anchor = example.scene_object.points[closest->scene_index];
  const RigidTransform frame = d.frame();

  std::vector<double> weights;
  weights.reserve(tensor.points.size());
  for (const auto& tp : tensor.points) weights.push_back(tp.weight);

  Rng rng(mix_seed(opts.seed, 0xDE5C));
  std::vector<std::uint32_t> chosen = opts.method == SamplingMethod::Uniform
                                          ? sample_without_replacement(weights.size(), opts.n, rng)
                                          : weighted_draws(weights, opts.n, rng);
  std::sort(chosen.begin(), chosen.end(), [&](std::uint32_t a, std::uint32_t b) {
    return weights[a] > weights[b] || (weights[a] == weights[b] && a < b);
  });

  d.keypoints.reserve(chosen.size());
  for (auto i : chosen) {
    const auto& tp = tensor.points[i];
    d.keypoints.push_back({frame.apply(tp.position), frame.rotate(tp.provenance), tp.weight});
  }
  d.w_max_norm = d.keypoints.front().weight;

  if (opts.bundle) {
    TrainingBundle b;
    b.query_object = apply_transform(std::span<const Point3>(example.posed_query().points), frame);
    b.scene_object = apply_transform(std::span<const Point3>(example.scene_object.points), frame);
    b.bisector.reserve(tensor.points.size());
    for (const auto& tp : tensor.points) b.bisector.push_back(frame.apply(tp.position));
    b.eps = tensor.eps;
    d.bundle = std::move(b);
  }
  return d;
}

namespace {

struct Nearest {
  std::size_t index = 0;
  double d2 = std::numeric_limits<double>::infinity();
};

Nearest brute_nearest(const std::vector<Point3>& pts, const Point3& x) {
  Nearest best;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = squared_distance(pts[i], x);
    if (d2 < best.d2) best = {i, d2};
  }
  return best;
}

void record(SourceCheck& c, std::size_t item, const std::string& what) {
  if (c.failures++ == 0) c.detail = what + " " + std::to_string(item);
  c.passed = false;
}

}  // namespace

std::vector<SourceCheck> check_against_source(const AffordanceDescriptor& d, double tol) {
  std::vector<SourceCheck> out;
  SourceCheck order, range;
  order.name = "keypoint order";
  range.name = "weight range";
  for (std::size_t i = 0; i < d.keypoints.size(); ++i) {
    const double w = d.keypoints[i].weight;
    if (!(w >= 0.0 && w <= 1.0)) record(range, i, "keypoint");
    if (i > 0 && w > d.keypoints[i - 1].weight) record(order, i, "keypoint");
  }
  out.push_back(order);
  out.push_back(range);
  if (!d.bundle) return out;

  const TrainingBundle& b = *d.bundle;
  const auto& query = b.query_object;
  const auto& scene = b.scene_object;
  SourceCheck equi, prov;
  equi.name = "equidistance";
  prov.name = "provenance";
  if (query.empty() || scene.empty()) {
    record(equi, 0, "empty source cloud");
    out.push_back(equi);
    return out;
  }
  auto equidistant = [&](const Point3& x) {
    const double dq = std::sqrt(brute_nearest(query, x).d2);
    const double ds = std::sqrt(brute_nearest(scene, x).d2);
    return std::abs(dq - ds) <= b.eps + tol;
  };
  for (std::size_t i = 0; i < d.keypoints.size(); ++i) {
    const auto& k = d.keypoints[i];
    if (!equidistant(k.position)) record(equi, i, "keypoint");
    const Point3 target = k.position + k.provenance;
    const Nearest n = brute_nearest(scene, k.position);
    bool ok = (scene[n.index] - target).norm() <= tol;
    if (!ok) {
      // Equidistant ties may resolve to another scene point of the same distance.
      const Nearest at = brute_nearest(scene, target);
      ok = std::sqrt(at.d2) <= tol && k.provenance.norm() <= std::sqrt(n.d2) + tol;
    }
    if (!ok) record(prov, i, "keypoint");
  }
  for (std::size_t i = 0; i < b.bisector.size(); ++i)
    if (!equidistant(b.bisector[i])) record(equi, i, "bisector point");
  out.push_back(equi);
  out.push_back(prov);
  return out;
}

std::optional<Vec3> default_n_aff(std::string_view affordance) {
  if (affordance == "placing" || affordance == "hanging" || affordance == "sitting" || affordance == "riding")
    return Vec3::UnitZ();
  if (affordance == "filling") return -Vec3::UnitZ();
  return std::nullopt;
}

}  // namespace afft
