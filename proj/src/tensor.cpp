#include "afft/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "afft/error.hpp"
#include "afft/rng.hpp"
#include "afft/sampling.hpp"

namespace afft {

void InteractionExample::validate() const {
  if (query_object.empty() || scene_object.empty()) throw InputError("interaction example needs two non-empty clouds");
  query_object.validate();
  scene_object.validate();
  if (!pose.is_valid()) throw InputError("interaction pose is not a rigid transform");
}

namespace {

bool lexicographic_less(const Point3& a, const Point3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

struct RootFinder {
  const SceneIndex& query;
  const SceneIndex& scene;
  double eps;

  double difference(const Point3& x) const {
    return std::sqrt(query.nearest(x).squared_distance) - std::sqrt(scene.nearest(x).squared_distance);
  }

  /// Bisects a segment whose start is closer to the query (f <= 0) and whose
  /// end is closer to the scene (f >= 0).
  std::optional<Point3> solve(const Point3& from, const Point3& to) const {
    double lo = 0.0, hi = 1.0;
    const Vec3 dir = to - from;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Point3 x = from + mid * dir;
      const double f = difference(x);
      if (std::abs(f) <= eps) return x;
      if (f < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    return std::nullopt;
  }
};

}  // namespace

std::vector<Point3> compute_bisector_points(const SceneIndex& query, const SceneIndex& scene,
                                            const Point3& trim_center, double trim_radius, double eps,
                                            std::uint64_t seed, const BisectorConfig& cfg, Exec exec) {
  if (!(eps > 0.0)) throw InputError("bisector tolerance must be positive");
  if (!(trim_radius > 0.0)) throw InputError("trim radius must be positive");

  const RootFinder finder{query, scene, eps};
  const double jitter_radius = cfg.jitter_radius_fraction * trim_radius;
  const double trim2 = trim_radius * trim_radius;
  const std::size_t rays = 1 + cfg.jitter_rays + cfg.outward_rays;
  std::vector<std::uint32_t> trimmed_scene;
  if (cfg.outward_rays > 0) trimmed_scene = scene.within_radius(trim_center, trim_radius);
  const std::size_t per_batch = std::max<std::size_t>(1, (cfg.target_count + rays - 1) / rays);

  Rng order_rng(mix_seed(seed, 0xB15EC7));
  const auto seed_order = sample_without_replacement(query.size(), query.size(), order_rng);

  std::vector<Point3> out;
  for (std::size_t batch = 0; batch < cfg.max_batches && out.size() < cfg.target_count; ++batch) {
    std::vector<std::vector<Point3>> slots(per_batch);
    auto body = [&](std::ptrdiff_t local) {
      const std::size_t slot = batch * per_batch + static_cast<std::size_t>(local);
      const Point3& q = query.point(seed_order[slot % seed_order.size()]);
      const bool first_round = slot < seed_order.size();
      const Neighbor s = scene.nearest(q);
      Rng rng(mix_seed(seed, slot));
      std::vector<std::uint32_t> ball;
      if (cfg.jitter_rays > 0) ball = scene.within_radius(scene.point(s.index), jitter_radius);

      auto& found = slots[local];
      for (std::size_t r = 0; r < rays; ++r) {
        if (r > cfg.jitter_rays) {
          if (trimmed_scene.empty()) continue;
          // Alternate sides: beyond q away from a scene point, or beyond a
          // scene point away from q.
          const Point3& other = scene.point(trimmed_scene[rng.below(trimmed_scene.size())]);
          const bool query_side = (r - cfg.jitter_rays) % 2 == 1;
          const Point3& base = query_side ? q : other;
          const Vec3 dir = query_side ? Vec3(q - other) : Vec3(other - q);
          const double len = dir.norm();
          if (!(len > 0.0)) continue;
          const Point3 start = base + (rng.uniform() * trim_radius / len) * dir;
          std::optional<Point3> x;
          if (finder.difference(start) <= 0.0)
            x = finder.solve(start, scene.point(scene.nearest(start).index));
          else
            x = finder.solve(query.point(query.nearest(start).index), start);
          if (x && squared_distance(*x, trim_center) <= trim2) found.push_back(*x);
          continue;
        }
        std::uint32_t target = s.index;
        // Later rounds revisit seed points, so their direct ray would repeat.
        if (r > 0 || !first_round) {
          if (ball.empty()) continue;
          target = ball[rng.below(ball.size())];
        }
        const auto x = finder.solve(q, scene.point(target));
        if (x && squared_distance(*x, trim_center) <= trim2) found.push_back(*x);
      }
    };
    const auto n = static_cast<std::ptrdiff_t>(per_batch);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
      for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    } else {
      for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    }
    for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
  }

  std::sort(out.begin(), out.end(), lexicographic_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw ComputeError("interaction out of range");
  return out;
}

std::vector<Point3> compute_bisector_points(const PointCloud& query, const PointCloud& scene,
                                            const Point3& trim_center, double trim_radius, double eps,
                                            std::uint64_t seed, const BisectorConfig& cfg, Exec exec) {
  if (query.empty() || scene.empty()) throw InputError("bisector needs two non-empty clouds");
  const SceneIndex qi(query);
  const SceneIndex si(scene);
  return compute_bisector_points(qi, si, trim_center, trim_radius, eps, seed, cfg, exec);
}

InteractionTensor compute_tensor(const InteractionExample& example, double eps, std::uint64_t seed,
                                 const BisectorConfig& cfg, Exec exec) {
  example.validate();
  const PointCloud posed = example.posed_query();
  const Aabb box = bounding_box(posed.points);

  InteractionTensor tensor;
  tensor.trim_center = box.center();
  tensor.trim_radius = box.diagonal();
  if (!(tensor.trim_radius > 0.0)) throw InputError("query object has a zero-size bounding box");
  tensor.eps = eps > 0.0 ? eps : default_bisector_eps(tensor.trim_radius);

  const SceneIndex query_index(posed);
  const SceneIndex scene_index(example.scene_object);
  const auto bisector = compute_bisector_points(query_index, scene_index, tensor.trim_center, tensor.trim_radius,
                                                tensor.eps, seed, cfg, exec);

  tensor.points.reserve(bisector.size());
  std::vector<double> raw;
  raw.reserve(bisector.size());
  for (const auto& b : bisector) {
    const Neighbor nn = scene_index.nearest(b);
    TensorPoint tp;
    tp.position = b;
    tp.provenance = scene_index.point(nn.index) - b;
    tp.raw_weight = tp.provenance.norm();
    tp.scene_index = nn.index;
    raw.push_back(tp.raw_weight);
    tensor.points.push_back(tp);
  }
  const auto w = normalize_weights(raw);
  for (std::size_t i = 0; i < w.size(); ++i) tensor.points[i].weight = w[i];
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  tensor.w_min = *lo;
  tensor.w_max = *hi;
  return tensor;
}

std::vector<double> normalize_weights(std::span<const double> raw) {
  if (raw.empty()) return {};
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<double> out(raw.size(), 1.0);
  if (range > 0.0)
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::clamp(1.0 - (raw[i] - min) / range, 0.0, 1.0);
  return out;
}

}  // namespace afft
