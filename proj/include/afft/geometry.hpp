#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace afft {

using Vec3 = Eigen::Vector3d;
using Point3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Squared Euclidean distance, evaluated in a fixed order so that the spatial
/// index and brute-force scans produce bit-identical values.
inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

/// Angle in [0, pi]. Returns 0 when either vector is zero.
double angle_between(const Vec3& a, const Vec3& b);

struct PointCloud {
  std::vector<Point3> points;
  std::vector<Vec3> normals;  // empty, or parallel to points with unit length

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }

  /// Throws InputError when an invariant does not hold.
  void validate() const;
};

using Face = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<Face> faces;

  bool empty() const { return faces.empty(); }
  double triangle_area(std::size_t f) const;
  Vec3 face_normal(std::size_t f) const;
  double surface_area() const;

  void append(const TriangleMesh& other);
  void validate() const;
};

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }

  RigidTransform inverse() const;
  bool is_valid(double tol = 1e-6) const;
};

/// Composition: (a * b).apply(x) == a.apply(b.apply(x)).
RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);

/// Rodrigues rotation about `axis` (need not be unit). Throws InputError on a zero axis.
RigidTransform rotation_about_axis(const Vec3& axis, double angle);

/// Smallest rotation taking unit direction `from` onto `to`. Antiparallel inputs
/// rotate by pi about an axis perpendicular to `from`.
RigidTransform rotation_between(const Vec3& from, const Vec3& to);

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);
std::vector<Point3> apply_transform(std::span<const Point3> points, const RigidTransform& t);

struct Aabb {
  Point3 min;
  Point3 max;

  Point3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return (max - min).norm(); }
  bool contains(const Point3& p, double margin = 0.0) const;
};

Aabb bounding_box(std::span<const Point3> points);
double bounding_box_diagonal(const PointCloud& cloud);

}  // namespace afft
