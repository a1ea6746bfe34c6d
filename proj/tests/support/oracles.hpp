#pragma once

// Brute-force references and small statistics helpers shared by the unit tests.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "afft/geometry.hpp"
#include "afft/kdtree.hpp"
#include "afft/rng.hpp"

namespace afft::testing {

inline Neighbor linear_nearest(std::span<const Point3> pts, const Point3& q) {
  Neighbor best;
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    const Neighbor n{i, squared_distance(pts[i], q)};
    if (n < best) best = n;
  }
  return best;
}

inline double linear_distance(std::span<const Point3> pts, const Point3& q) {
  return std::sqrt(linear_nearest(pts, q).squared_distance);
}

inline std::vector<Point3> random_points(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = scale * Point3(rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5);
  return pts;
}

inline double chi_square(std::span<const double> observed, std::span<const double> expected) {
  double x = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    x += d * d / expected[i];
  }
  return x;
}

// Upper 1% point of the chi-square distribution (Wilson-Hilferty).
inline double chi_square_critical_01(std::size_t dof) {
  const double k = static_cast<double>(dof);
  const double z = 2.3263478740408408;
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

inline double degrees(double rad) { return rad * 180.0 / M_PI; }

}  // namespace afft::testing
