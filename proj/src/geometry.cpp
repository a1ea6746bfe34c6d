#include "afft/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include <Eigen/Geometry>

#include "afft/error.hpp"

namespace afft {

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

void PointCloud::validate() const {
  if (!normals.empty() && normals.size() != points.size())
    throw InputError("normals count " + std::to_string(normals.size()) +
                     " does not match point count " + std::to_string(points.size()));
  for (const auto& p : points)
    if (!is_finite(p)) throw InputError("non-finite point coordinate");
  for (const auto& n : normals)
    if (!is_finite(n) || std::abs(n.norm() - 1.0) > 1e-6) throw InputError("normal is not unit length");
}

double TriangleMesh::triangle_area(std::size_t f) const {
  const auto& [a, b, c] = faces[f];
  return 0.5 * (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]).norm();
}

Vec3 TriangleMesh::face_normal(std::size_t f) const {
  const auto& [a, b, c] = faces[f];
  return (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]).normalized();
}

double TriangleMesh::surface_area() const {
  double total = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) total += triangle_area(f);
  return total;
}

void TriangleMesh::append(const TriangleMesh& other) {
  const auto offset = static_cast<std::uint32_t>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  faces.reserve(faces.size() + other.faces.size());
  for (const auto& f : other.faces) faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
}

void TriangleMesh::validate() const {
  if (faces.empty() || vertices.empty()) throw InputError("empty geometry");
  for (const auto& v : vertices)
    if (!is_finite(v)) throw InputError("non-finite vertex coordinate");
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto idx : faces[f])
      if (idx >= vertices.size()) throw InputError("face " + std::to_string(f) + " index out of range");
    if (!(triangle_area(f) > 0.0)) throw InputError("face " + std::to_string(f) + " is degenerate");
  }
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !is_finite(translation)) return false;
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidTransform rotation_about_axis(const Vec3& axis, double angle) {
  const double len = axis.norm();
  if (!(len > 0.0) || !std::isfinite(len)) throw InputError("rotation axis must be non-zero");
  const Vec3 k = axis / len;
  Mat3 kx;
  kx << 0.0, -k.z(), k.y(),
        k.z(), 0.0, -k.x(),
        -k.y(), k.x(), 0.0;
  const Mat3 r = Mat3::Identity() + std::sin(angle) * kx + (1.0 - std::cos(angle)) * (kx * kx);
  return {r, Vec3::Zero()};
}

RigidTransform rotation_between(const Vec3& from, const Vec3& to) {
  const Vec3 a = from.normalized();
  const Vec3 b = to.normalized();
  const Vec3 axis = a.cross(b);
  const double s = axis.norm();
  const double c = a.dot(b);
  if (s < 1e-12) {
    if (c > 0.0) return RigidTransform::identity();
    // Antiparallel: any perpendicular axis works; pick the one least aligned with `a`.
    Eigen::Index least = 0;
    a.cwiseAbs().minCoeff(&least);
    return rotation_about_axis(a.cross(Vec3::Unit(least)), M_PI);
  }
  return rotation_about_axis(axis, std::atan2(s, c));
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.points = apply_transform(std::span<const Point3>(cloud.points), t);
  out.normals.reserve(cloud.normals.size());
  for (const auto& n : cloud.normals) out.normals.push_back(t.rotate(n));
  return out;
}

std::vector<Point3> apply_transform(std::span<const Point3> points, const RigidTransform& t) {
  std::vector<Point3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(t.apply(p));
  return out;
}

bool Aabb::contains(const Point3& p, double margin) const {
  return (p.array() >= min.array() - margin).all() && (p.array() <= max.array() + margin).all();
}

Aabb bounding_box(std::span<const Point3> points) {
  if (points.empty()) throw InputError("empty geometry");
  Aabb box{points.front(), points.front()};
  for (const auto& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

double bounding_box_diagonal(const PointCloud& cloud) { return bounding_box(cloud.points).diagonal(); }

}  // namespace afft
