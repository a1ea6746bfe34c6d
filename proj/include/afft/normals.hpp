#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "afft/geometry.hpp"
#include "afft/kdtree.hpp"
#include "afft/parallel.hpp"

namespace afft {

inline constexpr std::size_t kDefaultNormalNeighbors = 16;

/// PCA normal at `query` from its k nearest neighbours in `index`: the
/// eigenvector of the smallest covariance eigenvalue, flipped so that
/// dot(normal, hint) >= 0. Empty when the neighbourhood is rank-deficient
/// (coincident or collinear points).
std::optional<Vec3> estimate_normal_at(const SceneIndex& index, const Point3& query, std::size_t k,
                                       const Vec3& hint);

struct NormalEstimate {
  PointCloud cloud;          // normals filled; invalid entries hold the normalized hint
  std::vector<bool> valid;   // false where the neighbourhood was degenerate
};

/// Normals for every point of `cloud`. Requires k >= 3 and |cloud| >= k.
NormalEstimate estimate_normals(const PointCloud& cloud, std::size_t k, const Vec3& orientation_hint,
                                Exec exec = Exec::Parallel);

}  // namespace afft
