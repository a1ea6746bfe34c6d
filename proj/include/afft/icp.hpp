#pragma once

#include <span>
#include <vector>

#include "afft/geometry.hpp"
#include "afft/kdtree.hpp"

namespace afft {

struct RegistrationResult {
  RigidTransform transform;
  double rmse = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> rmse_history;  // initial rmse, then one entry per accepted step
};

/// Least-squares rigid motion taking `from[i]` onto `to[i]` (Kabsch, SVD).
/// Throws ComputeError("rank deficient") when fewer than three
/// non-collinear correspondences constrain the rotation.
RigidTransform fit_rigid(std::span<const Point3> from, std::span<const Point3> to);

/// Point-to-point ICP. A step whose closest-point rmse would increase is
/// rejected and the loop stops, so the reported history never increases.
RegistrationResult icp_point_to_point(std::span<const Point3> source, const SceneIndex& target,
                                      const RigidTransform& init, std::size_t max_iterations = 50,
                                      double convergence_eps = 1e-6);

}  // namespace afft
