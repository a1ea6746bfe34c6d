#include <algorithm>
#include <cmath>

#include "afft/error.hpp"
#include "afft/sampling.hpp"
#include "afft/synthgen.hpp"
#include "afft/tensor.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace afft;
using afft::testing::linear_distance;
using afft::testing::linear_nearest;

namespace {

PointCloud cloud_of(std::vector<Point3> pts) {
  PointCloud c;
  c.points = std::move(pts);
  return c;
}

PointCloud plane_patch(double z, double half, double step) {
  PointCloud c;
  for (double x = -half; x <= half + 1e-12; x += step)
    for (double y = -half; y <= half + 1e-12; y += step) c.points.emplace_back(x, y, z);
  return c;
}

// Small sphere hovering over a square patch.
InteractionExample ball_over_plate() {
  InteractionExample ex;
  ex.query_object = sample_mesh_surface(shapes::sphere({0, 0, 0}, 0.05, 24), 2e4, 1);
  ex.scene_object = sample_mesh_surface(shapes::quad({-0.15, -0.15, 0}, {0.3, 0, 0}, {0, 0.3, 0}), 2e4, 2);
  ex.pose = RigidTransform::from_translation({0, 0, 0.07});
  ex.affordance_name = "placing";
  return ex;
}

}  // namespace

TEST_CASE("two points: the perpendicular bisector plane") {
  const PointCloud q = cloud_of({{0, 0, 0}});
  const PointCloud s = cloud_of({{0, 0, 2}});
  const double eps = 0.01;
  const auto pts = compute_bisector_points(q, s, {0, 0, 1}, 1.5, eps, 3);
  REQUIRE_FALSE(pts.empty());
  for (const auto& p : pts) {
    CHECK(std::abs(p.z() - 1.0) <= eps);
    CHECK((p - Point3(0, 0, 1)).norm() <= 1.5);
  }
}

TEST_CASE("two parallel planes: points settle on the mid-plane") {
  const PointCloud q = plane_patch(0.0, 1.0, 0.05);
  const PointCloud s = plane_patch(2.0, 1.0, 0.05);
  const double eps = 0.005;
  const auto pts = compute_bisector_points(q, s, {0, 0, 1}, 2.0, eps, 1);
  std::size_t interior = 0;
  for (const auto& p : pts) {
    if (std::abs(p.x()) > 0.5 || std::abs(p.y()) > 0.5) continue;
    ++interior;
    CHECK(std::abs(p.z() - 1.0) <= 0.01);
  }
  CHECK(interior > 100);
}

TEST_CASE("tensor point provenance for a single scene point") {
  InteractionExample ex;
  ex.query_object = plane_patch(0.0, 1.0, 0.25);
  ex.scene_object = cloud_of({{0, 0, 2}});
  ex.affordance_name = "test";
  const InteractionTensor t = compute_tensor(ex, 0.0, 0);
  REQUIRE_FALSE(t.points.empty());
  double closest = 1e9;
  const TensorPoint* best = nullptr;
  for (const auto& tp : t.points) {
    CHECK((tp.position + tp.provenance - Point3(0, 0, 2)).norm() <= 1e-12);
    CHECK(tp.raw_weight == doctest::Approx(tp.provenance.norm()).epsilon(1e-12));
    const double d = (tp.position - Point3(0, 0, 1)).norm();
    if (d < closest) {
      closest = d;
      best = &tp;
    }
  }
  CHECK(closest <= 0.05);
  CHECK((best->provenance - Vec3(0, 0, 1)).norm() <= 0.06);
  CHECK(best->raw_weight == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("normalize_weights") {
  const std::vector<double> a{1, 3, 5};
  CHECK(normalize_weights(a) == std::vector<double>{1.0, 0.5, 0.0});
  const std::vector<double> b{2, 2, 2};
  CHECK(normalize_weights(b) == std::vector<double>{1.0, 1.0, 1.0});
  const std::vector<double> c{0, 10};
  CHECK(normalize_weights(c) == std::vector<double>{1.0, 0.0});
}

TEST_CASE("tensor invariants on a small fixture") {
  const InteractionExample ex = ball_over_plate();
  const InteractionTensor t = compute_tensor(ex, 0.0, 4);
  const PointCloud posed = ex.posed_query();
  REQUIRE_FALSE(t.points.empty());
  CHECK(t.eps == doctest::Approx(0.005 * t.trim_radius));
  CHECK(t.trim_radius == doctest::Approx(bounding_box_diagonal(posed)));

  std::vector<TensorPoint> by_raw = t.points;
  std::sort(by_raw.begin(), by_raw.end(), [](auto& a, auto& b) { return a.raw_weight < b.raw_weight; });
  CHECK(by_raw.front().weight == 1.0);
  CHECK(by_raw.back().weight == 0.0);

  for (const auto& tp : t.points) {
    // Equidistance and provenance against linear scans.
    const double dq = linear_distance(posed.points, tp.position);
    const double ds = linear_distance(ex.scene_object.points, tp.position);
    REQUIRE(std::abs(dq - ds) <= t.eps);
    const Neighbor n = linear_nearest(ex.scene_object.points, tp.position);
    REQUIRE(n.index == tp.scene_index);
    REQUIRE((tp.position + tp.provenance - ex.scene_object.points[n.index]).norm() <= 1e-12);
    // Trim containment, weight bounds and the affine flip.
    CHECK((tp.position - t.trim_center).norm() <= t.trim_radius);
    CHECK(tp.raw_weight >= t.w_min);
    CHECK(tp.raw_weight <= t.w_max);
    CHECK(tp.weight == doctest::Approx(1.0 - (tp.raw_weight - t.w_min) / (t.w_max - t.w_min)));
  }
  for (std::size_t i = 1; i < by_raw.size(); ++i)
    if (by_raw[i].raw_weight > by_raw[i - 1].raw_weight) CHECK(by_raw[i].weight < by_raw[i - 1].weight);
}

TEST_CASE("bisector coverage against a grid oracle") {
  const InteractionExample ex = ball_over_plate();
  const InteractionTensor t = compute_tensor(ex, 0.0, 0);
  const PointCloud posed = ex.posed_query();
  const SceneIndex qi(posed), si(ex.scene_object);
  std::vector<Point3> tensor_pts;
  for (const auto& tp : t.points) tensor_pts.push_back(tp.position);
  const SceneIndex ti(tensor_pts);

  constexpr int cells = 48;
  const double cell = 2.0 * t.trim_radius / cells;
  std::size_t crossing = 0, covered = 0;
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j)
      for (int k = 0; k < cells; ++k) {
        const Point3 x = t.trim_center + cell * Vec3(i + 0.5, j + 0.5, k + 0.5) - Vec3::Constant(t.trim_radius);
        if ((x - t.trim_center).norm() > t.trim_radius - cell) continue;
        const double f = std::sqrt(qi.nearest(x).squared_distance) - std::sqrt(si.nearest(x).squared_distance);
        if (std::abs(f) > cell / 2) continue;
        ++crossing;
        if (std::sqrt(ti.nearest(x).squared_distance) <= 2 * cell) ++covered;
      }
  REQUIRE(crossing > 100);
  CHECK(static_cast<double>(covered) >= 0.9 * static_cast<double>(crossing));
}

TEST_CASE("rigid equivariance") {
  const InteractionExample ex = ball_over_plate();
  const InteractionTensor t = compute_tensor(ex, 0.0, 2);
  // Quarter turns keep the axis-aligned trim box aligned, so the trim sphere moves rigidly.
  const RigidTransform m = RigidTransform::from_translation({0.4, -1.0, 0.25}) * rotation_about_axis(Vec3::UnitZ(), M_PI / 2);
  InteractionExample moved = ex;
  moved.scene_object = apply_transform(ex.scene_object, m);
  moved.pose = m * ex.pose;
  const InteractionTensor u = compute_tensor(moved, t.eps, 2);
  REQUIRE(u.points.size() == t.points.size());

  std::vector<Point3> upos;
  for (const auto& tp : u.points) upos.push_back(tp.position);
  const SceneIndex ui(upos);
  for (const auto& tp : t.points) {
    const Neighbor n = ui.nearest(m.apply(tp.position));
    const TensorPoint& other = u.points[n.index];
    REQUIRE(std::sqrt(n.squared_distance) <= 1e-6);
    CHECK(std::abs(other.raw_weight - tp.raw_weight) <= 1e-9);
    CHECK((other.provenance - m.rotate(tp.provenance)).norm() <= 1e-6);
  }
}

TEST_CASE("determinism and serial/parallel agreement") {
  const InteractionExample ex = ball_over_plate();
  const InteractionTensor a = compute_tensor(ex, 0.0, 9, {}, Exec::Serial);
  const InteractionTensor b = compute_tensor(ex, 0.0, 9, {}, Exec::Parallel);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].position == b.points[i].position);
    CHECK(a.points[i].provenance == b.points[i].provenance);
  }
  for (std::size_t i = 1; i < a.points.size(); ++i) {
    const Point3 &p = a.points[i - 1].position, &q = a.points[i].position;
    CHECK(std::lexicographical_compare(p.data(), p.data() + 3, q.data(), q.data() + 3));
  }
}

TEST_CASE("objects too far apart") {
  InteractionExample ex;
  ex.query_object = plane_patch(0.0, 0.05, 0.01);
  ex.scene_object = plane_patch(100.0, 0.05, 0.01);
  ex.affordance_name = "x";
  CHECK_THROWS_WITH_AS(compute_tensor(ex, 0.0, 0), "interaction out of range", ComputeError);
  CHECK_THROWS_AS(compute_bisector_points(ex.query_object, ex.scene_object, {0, 0, 0}, 1.0, 0.0, 0), InputError);
}

TEST_CASE("touching objects keep their contact points") {
  InteractionExample ex = ball_over_plate();
  ex.pose = RigidTransform::from_translation({0, 0, 0.05});
  const InteractionTensor t = compute_tensor(ex, 0.0, 0);
  CHECK(t.w_min <= 1.0 / std::sqrt(2e4));
  CHECK(std::any_of(t.points.begin(), t.points.end(), [](auto& tp) { return tp.weight == 1.0; }));
}
