#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afft/geometry.hpp"
#include "afft/tensor.hpp"

namespace afft {

/// Closed or open triangle-mesh primitives with outward-facing winding.
namespace shapes {

TriangleMesh box(const Point3& lo, const Point3& hi);
/// Single-sided rectangle at `origin` spanned by u and v; faces along u x v.
TriangleMesh quad(const Point3& origin, const Vec3& u, const Vec3& v);

/// Surface of revolution of a (radius, height) profile about the axis from
/// `base` along `axis`. The profile should run so that the outside is on its
/// right when looking along +theta; e.g. bottom-to-top for a cylinder wall.
TriangleMesh revolve(const std::vector<Eigen::Vector2d>& profile, const Point3& base, const Vec3& axis,
                     int segments, double theta0 = 0.0, double theta1 = 2.0 * M_PI);

TriangleMesh cylinder(const Point3& a, const Point3& b, double radius, bool caps = true, int segments = 24);
TriangleMesh capsule(const Point3& a, const Point3& b, double radius, int segments = 20);
TriangleMesh sphere(const Point3& center, double radius, int segments = 20);
/// Tube of constant radius along a polyline, with spherical joints.
TriangleMesh tube(const std::vector<Point3>& path, double radius, int segments = 12);

TriangleMesh translated(TriangleMesh mesh, const Vec3& offset);

}  // namespace shapes

enum class SceneKind { TableTop, HangingRack, FaucetSink, PenetrationBlock, RoomComposite, Motorbike };

std::string_view to_string(SceneKind k);
std::optional<SceneKind> parse_scene_kind(std::string_view s);

struct ScenePreset {
  SceneKind kind = SceneKind::TableTop;
  /// Continuous geometry morph; 0 is the canonical fixture. TableTop: height
  /// +0.1 m per unit. HangingRack: bar radius 1.5 cm + 1 cm per unit.
  /// FaucetSink: spout height +5 cm per unit. PenetrationBlock: block height
  /// +10 cm per unit. Motorbike: saddle height +5 cm per unit.
  double perturbation = 0.0;
  std::uint64_t seed = 0;
  /// Legs, posts and bases. Training scenes drop them to keep clouds small.
  bool with_supports = true;
  /// Main extents; zero components take the kind's defaults.
  /// TableTop (width, depth, top height) = (0.8, 0.6, 0.75).
  /// HangingRack (bar length, -, bar height) = (0.6, -, 1.2).
  /// FaucetSink (counter width, depth, height) = (0.8, 0.6, 0.9).
  /// PenetrationBlock block size = (0.4, 0.4, 0.3).
  /// RoomComposite (x, y, wall height) = (4, 4, 2.5).
  Vec3 dimensions = Vec3::Zero();
  /// TableTop slab thickness; 0 gives a single upward-facing rectangle.
  double top_thickness = 0.03;
};

TriangleMesh generate_scene(const ScenePreset& preset);

/// Geometry of the canonical hanging rack bar.
struct RackBar {
  Point3 center;
  double length;
  double radius;
};
RackBar rack_bar(const ScenePreset& preset);

/// Block extent of a PenetrationBlock preset (interior slices included).
Aabb penetration_block_bounds(const ScenePreset& preset);

enum class QueryObjectKind { Bowl, Hanger, Mug, Bottle, HumanSitting, HumanRiding };

std::string_view to_string(QueryObjectKind k);

/// Query objects in a local frame whose origin is their contact point with
/// the supporting scene surface (bowl base, hook apex, mug rim centre, ...).
TriangleMesh make_query_object(QueryObjectKind kind);

struct ContactSpec {
  Point3 contact_point = Point3::Zero();  // on the scene-object surface
  Vec3 direction = Vec3::UnitZ();         // from the scene surface towards the object
  double gap = 0.002;                     // clearance between the surfaces
  double yaw = 0.0;                       // about world +z
};

struct SamplingSpec {
  double query_density = 2e4;
  double scene_density = 1e4;
  std::uint64_t seed = 0;
};

/// Samples both meshes and builds the pose realizing the placement. Throws
/// InputError when the contact point lies outside the scene bounds.
InteractionExample generate_training_example(const ScenePreset& preset, const TriangleMesh& query_object,
                                             const ContactSpec& contact, const SamplingSpec& sampling,
                                             std::string affordance_name);

/// Bundled single-example fixtures, one per affordance.
struct TrainingFixture {
  std::string name;
  std::string affordance;
  ScenePreset scene;
  QueryObjectKind query_kind;
  ContactSpec contact;
  SamplingSpec sampling;
  Vec3 n_aff = Vec3::UnitZ();
  double s_aff = 0.5;
};

std::vector<std::string> training_fixture_names();
std::optional<TrainingFixture> find_training_fixture(std::string_view name);
InteractionExample build_training_example(const TrainingFixture& fixture);

}  // namespace afft
