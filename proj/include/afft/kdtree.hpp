#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "afft/geometry.hpp"

namespace afft {

struct Neighbor {
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();
  double squared_distance = std::numeric_limits<double>::infinity();

  /// Strict weak order used everywhere a "nearest" is chosen: distance first,
  /// then lowest point index.
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.index < b.index);
  }
};

/// Immutable kd-tree over a point set. Every query returns exactly what a
/// linear scan would, including the lowest-index rule on equal distances, so
/// it is safe to share between threads and to check against brute force.
class SceneIndex {
 public:
  explicit SceneIndex(std::vector<Point3> points);
  explicit SceneIndex(const PointCloud& cloud) : SceneIndex(cloud.points) {}

  std::size_t size() const { return points_.size(); }
  const Point3& point(std::size_t i) const { return points_[i]; }
  std::span<const Point3> points() const { return points_; }

  Neighbor nearest(const Point3& q) const;

  /// Up to k neighbours ordered by (distance, index).
  std::vector<Neighbor> k_nearest(const Point3& q, std::size_t k) const;

  /// Indices with distance <= radius, ascending by index.
  std::vector<std::uint32_t> within_radius(const Point3& q, double radius) const;

  /// Nearest point among those within `radius` of `center`; infinite
  /// distance when the ball holds no point.
  Neighbor nearest_in_ball(const Point3& q, const Point3& center, double radius) const;

 private:
  struct Node {
    Point3 lo;
    Point3 hi;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  static double box_distance2(const Node& n, const Point3& q);

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Point3> ordered_points_;  // points_ permuted by order_, for locality
  std::vector<Node> nodes_;
};

/// The points of an index inside a ball, searched in place. Behaves like a
/// SceneIndex built from within_radius(center, radius), except that reported
/// indices refer to the full index.
class BallView {
 public:
  BallView(const SceneIndex& index, const Point3& center, double radius)
      : index_(&index), center_(center), radius_(radius) {}

  Neighbor nearest(const Point3& q) const { return index_->nearest_in_ball(q, center_, radius_); }
  const Point3& point(std::size_t i) const { return index_->point(i); }
  const Point3& center() const { return center_; }
  double radius() const { return radius_; }
  std::vector<Point3> gather() const;

 private:
  const SceneIndex* index_;
  Point3 center_;
  double radius_;
};

}  // namespace afft
