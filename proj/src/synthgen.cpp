#include "afft/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "afft/error.hpp"
#include "afft/rng.hpp"
#include "afft/sampling.hpp"

namespace afft {

namespace {
void append_arc(std::vector<Eigen::Vector2d>& profile, double cz, double r, double from, double to, int steps) {
  for (int i = 0; i <= steps; ++i) {
    const double phi = from + (to - from) * i / steps;
    profile.emplace_back(std::max(0.0, r * std::cos(phi)), cz + r * std::sin(phi));
  }
}
}  // namespace

namespace shapes {

TriangleMesh quad(const Point3& origin, const Vec3& u, const Vec3& v) {
  TriangleMesh m;
  m.vertices = {origin, origin + u, origin + u + v, origin + v};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

TriangleMesh box(const Point3& lo, const Point3& hi) {
  const Vec3 d = hi - lo;
  const Vec3 dx(d.x(), 0, 0), dy(0, d.y(), 0), dz(0, 0, d.z());
  TriangleMesh m;
  m.append(quad(lo, dy, dx));                               // -z
  m.append(quad({lo.x(), lo.y(), hi.z()}, dx, dy));         // +z
  m.append(quad(lo, dx, dz));                               // -y
  m.append(quad({lo.x(), hi.y(), lo.z()}, dz, dx));         // +y
  m.append(quad(lo, dz, dy));                               // -x
  m.append(quad({hi.x(), lo.y(), lo.z()}, dy, dz));         // +x
  return m;
}

TriangleMesh revolve(const std::vector<Eigen::Vector2d>& profile, const Point3& base, const Vec3& axis,
                     int segments, double theta0, double theta1) {
  const Vec3 a = axis.normalized();
  const Vec3 helper = std::abs(a.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 e1 = helper.cross(a).normalized();
  const Vec3 e2 = a.cross(e1);
  const bool closed = std::abs(theta1 - theta0 - 2.0 * M_PI) < 1e-12;
  const int columns = closed ? segments : segments + 1;

  TriangleMesh m;
  for (const auto& pr : profile)
    for (int j = 0; j < columns; ++j) {
      const double th = theta0 + (theta1 - theta0) * j / segments;
      m.vertices.push_back(base + pr.y() * a + pr.x() * (std::cos(th) * e1 + std::sin(th) * e2));
    }
  auto vid = [&](std::size_t k, int j) {
    return static_cast<std::uint32_t>(k * columns + (closed ? j % segments : j));
  };
  auto add = [&](std::uint32_t i, std::uint32_t j, std::uint32_t k) {
    const Vec3 n = (m.vertices[j] - m.vertices[i]).cross(m.vertices[k] - m.vertices[i]);
    if (n.norm() > 1e-14) m.faces.push_back({i, j, k});
  };
  for (std::size_t k = 0; k + 1 < profile.size(); ++k)
    for (int j = 0; j < segments; ++j) {
      add(vid(k, j), vid(k, j + 1), vid(k + 1, j));
      add(vid(k, j + 1), vid(k + 1, j + 1), vid(k + 1, j));
    }
  return m;
}

TriangleMesh cylinder(const Point3& a, const Point3& b, double radius, bool caps, int segments) {
  const double len = (b - a).norm();
  std::vector<Eigen::Vector2d> profile;
  if (caps) profile.emplace_back(0.0, 0.0);
  profile.emplace_back(radius, 0.0);
  profile.emplace_back(radius, len);
  if (caps) profile.emplace_back(0.0, len);
  return revolve(profile, a, b - a, segments);
}

TriangleMesh sphere(const Point3& center, double radius, int segments) {
  std::vector<Eigen::Vector2d> profile;
  append_arc(profile, 0.0, radius, -M_PI / 2, M_PI / 2, segments / 2);
  return revolve(profile, center, Vec3::UnitZ(), segments);
}

TriangleMesh capsule(const Point3& a, const Point3& b, double radius, int segments) {
  const double len = (b - a).norm();
  if (len < 1e-12) return sphere(a, radius, segments);
  std::vector<Eigen::Vector2d> profile;
  append_arc(profile, 0.0, radius, -M_PI / 2, 0.0, segments / 4);
  append_arc(profile, len, radius, 0.0, M_PI / 2, segments / 4);
  return revolve(profile, a, b - a, segments);
}

TriangleMesh tube(const std::vector<Point3>& path, double radius, int segments) {
  TriangleMesh m;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) m.append(cylinder(path[i], path[i + 1], radius, false, segments));
  for (const auto& p : path) m.append(sphere(p, radius, segments));
  return m;
}

TriangleMesh translated(TriangleMesh mesh, const Vec3& offset) {
  for (auto& v : mesh.vertices) v += offset;
  return mesh;
}

}  // namespace shapes

std::string_view to_string(SceneKind k) {
  switch (k) {
    case SceneKind::TableTop: return "table-top";
    case SceneKind::HangingRack: return "hanging-rack";
    case SceneKind::FaucetSink: return "faucet-sink";
    case SceneKind::PenetrationBlock: return "penetration-block";
    case SceneKind::RoomComposite: return "room-composite";
    case SceneKind::Motorbike: return "motorbike";
  }
  return "unknown";
}

std::optional<SceneKind> parse_scene_kind(std::string_view s) {
  for (auto k : {SceneKind::TableTop, SceneKind::HangingRack, SceneKind::FaucetSink, SceneKind::PenetrationBlock,
                 SceneKind::RoomComposite, SceneKind::Motorbike})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

namespace {

using shapes::box;
using shapes::cylinder;
using shapes::quad;

double dim(const ScenePreset& p, int axis, double fallback) {
  const double v = p.dimensions[axis];
  return v > 0.0 ? v : fallback;
}

TriangleMesh table_top(const ScenePreset& p) {
  const double w = dim(p, 0, 0.8), d = dim(p, 1, 0.6);
  const double h = dim(p, 2, 0.75) + 0.1 * p.perturbation;
  if (!(h > 0.05)) throw InputError("table height must stay positive");
  constexpr double leg = 0.04;
  const double t = p.top_thickness;
  if (!(t >= 0.0)) throw InputError("table thickness must be non-negative");
  TriangleMesh m = t > 0.0 ? box({-w / 2, -d / 2, h - t}, {w / 2, d / 2, h})
                           : quad({-w / 2, -d / 2, h}, {w, 0, 0}, {0, d, 0});
  if (p.with_supports) {
    for (double sx : {-1.0, 1.0})
      for (double sy : {-1.0, 1.0}) {
        const double cx = sx * (w / 2 - 0.05), cy = sy * (d / 2 - 0.05);
        m.append(box({cx - leg / 2, cy - leg / 2, 0.0}, {cx + leg / 2, cy + leg / 2, h - t}));
      }
  }
  return m;
}

TriangleMesh hanging_rack(const ScenePreset& p) {
  const RackBar bar = rack_bar(p);
  const double half = bar.length / 2;
  TriangleMesh m = cylinder(bar.center - Vec3(half, 0, 0), bar.center + Vec3(half, 0, 0), bar.radius, true, 32);
  if (p.with_supports) {
    constexpr double post = 0.03;
    for (double sx : {-1.0, 1.0}) {
      const double cx = bar.center.x() + sx * (half + post / 2);
      m.append(box({cx - post / 2, bar.center.y() - post / 2, 0.0},
                   {cx + post / 2, bar.center.y() + post / 2, bar.center.z() + 0.04}));
      m.append(box({cx - 0.02, bar.center.y() - 0.2, 0.0}, {cx + 0.02, bar.center.y() + 0.2, 0.03}));
    }
  }
  return m;
}

TriangleMesh faucet_sink(const ScenePreset& p) {
  const double w = dim(p, 0, 0.8), d = dim(p, 1, 0.6), h = dim(p, 2, 0.9);
  constexpr double bx = 0.2, by = 0.15, depth = 0.2, t = 0.04;
  const double spout = h + 0.25 + 0.05 * p.perturbation;
  TriangleMesh m;
  m.append(box({-w / 2, -d / 2, h - t}, {-bx, d / 2, h}));
  m.append(box({bx, -d / 2, h - t}, {w / 2, d / 2, h}));
  m.append(box({-bx, -d / 2, h - t}, {bx, -by, h}));
  m.append(box({-bx, by, h - t}, {bx, d / 2, h}));
  const double floor = h - depth, wall = depth - t;
  m.append(quad({-bx, -by, floor}, {2 * bx, 0, 0}, {0, 2 * by, 0}));
  m.append(quad({-bx, -by, floor}, {0, 0, wall}, {2 * bx, 0, 0}) );   // faces +y
  m.append(quad({-bx, by, floor}, {2 * bx, 0, 0}, {0, 0, wall}));     // faces -y
  m.append(quad({-bx, -by, floor}, {0, 2 * by, 0}, {0, 0, wall}));    // faces +x
  m.append(quad({bx, -by, floor}, {0, 0, wall}, {0, 2 * by, 0}));     // faces -x
  const double riser_y = by + 0.07;
  m.append(cylinder({0, riser_y, h}, {0, riser_y, spout + 0.04}, 0.02, true));
  m.append(box({-0.05, -0.02, spout}, {0.05, riser_y + 0.02, spout + 0.03}));
  return m;
}

TriangleMesh penetration_block(const ScenePreset& p) {
  const Aabb b = penetration_block_bounds(p);
  TriangleMesh m = quad({-0.6, -0.6, 0.0}, {1.2, 0, 0}, {0, 1.2, 0});
  m.append(box(b.min, b.max));
  // Interior layers stand in for a solid, volumetrically sampled block.
  constexpr double spacing = 0.04, inset = 0.001;
  const Vec3 size = b.max - b.min;
  for (double z = b.min.z() + spacing; z < b.max.z() - spacing / 2; z += spacing)
    m.append(quad({b.min.x() + inset, b.min.y() + inset, z}, {size.x() - 2 * inset, 0, 0},
                  {0, size.y() - 2 * inset, 0}));
  return m;
}

TriangleMesh motorbike(const ScenePreset& p) {
  const double seat = 0.8 + 0.05 * p.perturbation;
  TriangleMesh m;
  for (double x : {-0.6, 0.6}) m.append(cylinder({x, -0.05, 0.3}, {x, 0.05, 0.3}, 0.3, true, 32));
  m.append(box({-0.5, -0.1, 0.35}, {0.5, 0.1, 0.7}));
  m.append(box({-0.35, -0.15, 0.7}, {0.05, 0.15, seat}));
  m.append(box({0.12, -0.1, 0.7}, {0.45, 0.1, 0.88}));
  m.append(cylinder({0.6, 0.0, 0.3}, {0.55, 0.0, 0.93}, 0.03, true));
  m.append(cylinder({0.55, -0.35, 0.95}, {0.55, 0.35, 0.95}, 0.015, true));
  for (double sy : {-1.0, 1.0}) m.append(cylinder({0.22, sy * 0.12, 0.28}, {0.22, sy * 0.25, 0.28}, 0.015, true));
  return m;
}

TriangleMesh room_composite(const ScenePreset& p) {
  const double rx = dim(p, 0, 4.0), ry = dim(p, 1, 4.0), wall = dim(p, 2, 2.5);
  Rng rng(mix_seed(p.seed, 0x200F));
  auto jitter = [&] { return (rng.uniform() - 0.5) * 0.2; };

  TriangleMesh m = quad({-rx / 2, -ry / 2, 0}, {rx, 0, 0}, {0, ry, 0});
  m.append(quad({-rx / 2, ry / 2, 0}, {rx, 0, 0}, {0, 0, wall}));     // faces -y
  m.append(quad({-rx / 2, -ry / 2, 0}, {0, ry, 0}, {0, 0, wall}));    // faces +x

  ScenePreset part;
  part.seed = p.seed;
  part.perturbation = p.perturbation;
  part.kind = SceneKind::TableTop;
  m.append(shapes::translated(generate_scene(part), {0.25 * rx + jitter(), 0.2 * ry + jitter(), 0}));
  part.kind = SceneKind::HangingRack;
  m.append(shapes::translated(generate_scene(part), {-0.25 * rx + jitter(), 0.3 * ry + jitter(), 0}));
  part.kind = SceneKind::FaucetSink;
  m.append(shapes::translated(generate_scene(part), {0.25 * rx + jitter(), -0.3 * ry + jitter(), 0}));
  part.kind = SceneKind::TableTop;
  part.dimensions = {1.0, 0.4, 0.45};
  m.append(shapes::translated(generate_scene(part), {-0.25 * rx + jitter(), -0.25 * ry + jitter(), 0}));
  return m;
}

}  // namespace

RackBar rack_bar(const ScenePreset& p) {
  const double radius = 0.015 + 0.01 * p.perturbation;
  if (!(radius > 0.001)) throw InputError("rack bar radius must stay positive");
  return {{0.0, 0.0, dim(p, 2, 1.2)}, dim(p, 0, 0.6), radius};
}

Aabb penetration_block_bounds(const ScenePreset& p) {
  const double bx = dim(p, 0, 0.4), by = dim(p, 1, 0.4);
  const double bz = dim(p, 2, 0.3) + 0.1 * p.perturbation;
  if (!(bz > 0.05)) throw InputError("block height must stay positive");
  return {{-bx / 2, -by / 2, 0.0}, {bx / 2, by / 2, bz}};
}

TriangleMesh generate_scene(const ScenePreset& preset) {
  switch (preset.kind) {
    case SceneKind::TableTop: return table_top(preset);
    case SceneKind::HangingRack: return hanging_rack(preset);
    case SceneKind::FaucetSink: return faucet_sink(preset);
    case SceneKind::PenetrationBlock: return penetration_block(preset);
    case SceneKind::RoomComposite: return room_composite(preset);
    case SceneKind::Motorbike: return motorbike(preset);
  }
  throw InputError("unknown scene preset");
}

std::string_view to_string(QueryObjectKind k) {
  switch (k) {
    case QueryObjectKind::Bowl: return "bowl";
    case QueryObjectKind::Hanger: return "hanger";
    case QueryObjectKind::Mug: return "mug";
    case QueryObjectKind::Bottle: return "bottle";
    case QueryObjectKind::HumanSitting: return "human-sitting";
    case QueryObjectKind::HumanRiding: return "human-riding";
  }
  return "unknown";
}

namespace {

TriangleMesh bowl() {
  constexpr double base = 0.03, radius = 0.07;
  const double cz = std::sqrt(radius * radius - base * base);
  std::vector<Eigen::Vector2d> profile{{0.0, 0.0}};
  append_arc(profile, cz, radius, std::atan2(-cz, base), 0.0, 12);
  return shapes::revolve(profile, Point3::Zero(), Vec3::UnitZ(), 32);
}

TriangleMesh hanger() {
  constexpr double tube_r = 0.003, hook_inner = 0.025;
  const double rc = hook_inner + tube_r;
  const Point3 hook_center(0, 0, -hook_inner);
  std::vector<Point3> hook;
  const double from = -110.0 * M_PI / 180.0, to = M_PI;
  for (int i = 0; i <= 24; ++i) {
    const double phi = from + (to - from) * i / 24;
    hook.push_back(hook_center + rc * Vec3(0, std::sin(phi), std::cos(phi)));
  }
  const Point3 apex(0, 0, -0.09);
  hook.push_back(apex);
  TriangleMesh m = shapes::tube(hook, tube_r);
  const Point3 left(0, -0.2, -0.19), right(0, 0.2, -0.19);
  m.append(shapes::tube({left, apex, right, left}, tube_r));
  return m;
}

TriangleMesh mug() {
  constexpr double r = 0.04, h = 0.1;
  TriangleMesh m = shapes::revolve({{0.0, -h}, {r, -h}, {r, 0.0}}, Point3::Zero(), Vec3::UnitZ(), 32);
  std::vector<Eigen::Vector2d> ring;
  for (int i = 0; i <= 12; ++i) {
    const double phi = 2.0 * M_PI * i / 12;
    ring.emplace_back(0.03 + 0.008 * std::cos(phi), 0.008 * std::sin(phi));
  }
  m.append(shapes::revolve(ring, {r - 0.005, 0.0, -h / 2}, Vec3::UnitY(), 16, M_PI / 2, 3 * M_PI / 2));
  return m;
}

TriangleMesh bottle() {
  return shapes::revolve({{0.0, 0.0}, {0.035, 0.0}, {0.035, 0.2}, {0.012, 0.26}, {0.012, 0.3}, {0.0, 0.3}},
                         Point3::Zero(), Vec3::UnitZ(), 32);
}

TriangleMesh human_sitting() {
  using shapes::capsule;
  TriangleMesh m;
  for (double s : {-1.0, 1.0}) {
    const double y = 0.1 * s;
    m.append(capsule({0.0, y, 0.075}, {0.42, y, 0.075}, 0.075));
    m.append(capsule({0.42, y, 0.075}, {0.45, y, -0.35}, 0.05));
    m.append(capsule({0.45, y, -0.38}, {0.6, y, -0.38}, 0.04));
    m.append(capsule({-0.05, 0.2 * s, 0.55}, {0.1, 0.22 * s, 0.35}, 0.04));
    m.append(capsule({0.1, 0.22 * s, 0.35}, {0.35, 0.2 * s, 0.3}, 0.035));
  }
  m.append(capsule({-0.02, 0.0, 0.16}, {-0.05, 0.0, 0.55}, 0.14));
  m.append(shapes::sphere({-0.05, 0.0, 0.77}, 0.1));
  return m;
}

TriangleMesh human_riding() {
  using shapes::capsule;
  TriangleMesh m = capsule({0.0, -0.12, 0.07}, {0.0, 0.12, 0.07}, 0.07);
  for (double s : {-1.0, 1.0}) {
    m.append(capsule({0.05, 0.22 * s, 0.07}, {0.32, 0.22 * s, 0.0}, 0.065));
    m.append(capsule({0.32, 0.22 * s, 0.0}, {0.22, 0.23 * s, -0.42}, 0.05));
    m.append(capsule({0.15, 0.3 * s, 0.52}, {0.35, 0.3 * s, 0.35}, 0.04));
    m.append(capsule({0.35, 0.3 * s, 0.35}, {0.58, 0.3 * s, 0.22}, 0.035));
  }
  m.append(capsule({0.0, 0.0, 0.2}, {0.12, 0.0, 0.52}, 0.14));
  m.append(shapes::sphere({0.18, 0.0, 0.74}, 0.1));
  return m;
}

}  // namespace

TriangleMesh make_query_object(QueryObjectKind kind) {
  switch (kind) {
    case QueryObjectKind::Bowl: return bowl();
    case QueryObjectKind::Hanger: return hanger();
    case QueryObjectKind::Mug: return mug();
    case QueryObjectKind::Bottle: return bottle();
    case QueryObjectKind::HumanSitting: return human_sitting();
    case QueryObjectKind::HumanRiding: return human_riding();
  }
  throw InputError("unknown query object");
}

InteractionExample generate_training_example(const ScenePreset& preset, const TriangleMesh& query_object,
                                             const ContactSpec& contact, const SamplingSpec& sampling,
                                             std::string affordance_name) {
  const TriangleMesh scene = generate_scene(preset);
  const Aabb bounds = bounding_box(scene.vertices);
  if (!bounds.contains(contact.contact_point, 1e-9)) throw InputError("placement outside scene bounds");
  if (!(contact.gap >= 0.0)) throw InputError("clearance gap must be non-negative");
  if (!(contact.direction.norm() > 0.0)) throw InputError("contact direction must be non-zero");

  InteractionExample ex;
  ex.affordance_name = std::move(affordance_name);
  ex.query_object = sample_mesh_surface(query_object, sampling.query_density, mix_seed(sampling.seed, 1));
  ex.scene_object = sample_mesh_surface(scene, sampling.scene_density, mix_seed(sampling.seed, 2));
  ex.pose = rotation_about_axis(Vec3::UnitZ(), contact.yaw);
  ex.pose.translation = contact.contact_point + contact.gap * contact.direction.normalized();
  return ex;
}

namespace {

std::vector<TrainingFixture> fixture_table() {
  std::vector<TrainingFixture> out;

  TrainingFixture bowl;
  bowl.name = "bowl-on-table";
  bowl.affordance = "placing";
  bowl.scene = {SceneKind::TableTop, 0.0, 0, false, {0.3, 0.3, 0.75}, 0.0};
  bowl.query_kind = QueryObjectKind::Bowl;
  bowl.contact = {{0.0, 0.0, 0.75}, Vec3::UnitZ(), 0.02, 0.0};
  bowl.sampling = {5e4, 5e4, 0};
  bowl.s_aff = 0.45;
  out.push_back(bowl);

  TrainingFixture hanger;
  hanger.name = "hanger-on-rack";
  hanger.affordance = "hanging";
  hanger.scene = {SceneKind::HangingRack, 0.0, 0, false, Vec3::Zero()};
  hanger.query_kind = QueryObjectKind::Hanger;
  const RackBar bar = rack_bar(hanger.scene);
  hanger.contact = {bar.center + Vec3(0, 0, bar.radius), Vec3::UnitZ(), 0.002, 0.0};
  hanger.sampling = {8e4, 8e4, 0};
  hanger.s_aff = 0.3;
  out.push_back(hanger);

  TrainingFixture mug;
  mug.name = "mug-under-faucet";
  mug.affordance = "filling";
  mug.scene = {SceneKind::FaucetSink, 0.0, 0, false, {0.5, 0.5, 0.9}};
  mug.query_kind = QueryObjectKind::Mug;
  mug.contact = {{0.0, 0.03, 1.15}, -Vec3::UnitZ(), 0.04, 0.0};
  mug.sampling = {5e4, 1e5, 0};
  mug.n_aff = -Vec3::UnitZ();
  out.push_back(mug);

  TrainingFixture sit;
  sit.name = "human-on-bench";
  sit.affordance = "sitting";
  sit.scene = {SceneKind::TableTop, 0.0, 0, false, {0.5, 1.0, 0.45}};
  sit.query_kind = QueryObjectKind::HumanSitting;
  sit.contact = {{0.0, 0.0, 0.45}, Vec3::UnitZ(), 0.03, 0.0};
  sit.sampling = {1e4, 2e4, 0};
  sit.s_aff = 0.6;
  out.push_back(sit);

  TrainingFixture ride;
  ride.name = "human-on-motorbike";
  ride.affordance = "riding";
  ride.scene = {SceneKind::Motorbike, 0.0, 0, false, Vec3::Zero()};
  ride.query_kind = QueryObjectKind::HumanRiding;
  ride.contact = {{-0.1, 0.0, 0.8}, Vec3::UnitZ(), 0.03, 0.0};
  ride.sampling = {1e4, 2e4, 0};
  out.push_back(ride);

  return out;
}

}  // namespace

std::vector<std::string> training_fixture_names() {
  std::vector<std::string> names;
  for (const auto& f : fixture_table()) names.push_back(f.name);
  return names;
}

std::optional<TrainingFixture> find_training_fixture(std::string_view name) {
  for (auto& f : fixture_table())
    if (f.name == name) return f;
  return std::nullopt;
}

InteractionExample build_training_example(const TrainingFixture& fixture) {
  return generate_training_example(fixture.scene, make_query_object(fixture.query_kind), fixture.contact,
                                   fixture.sampling, fixture.affordance);
}

}  // namespace afft
