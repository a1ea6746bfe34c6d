#include "afft/icp.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "afft/error.hpp"

namespace afft {

RigidTransform fit_rigid(std::span<const Point3> from, std::span<const Point3> to) {
  if (from.size() != to.size()) throw InputError("correspondence sets differ in size");
  if (from.size() < 3) throw ComputeError("rank deficient");
  Point3 cf = Point3::Zero(), ct = Point3::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    cf += from[i];
    ct += to[i];
  }
  cf /= static_cast<double>(from.size());
  ct /= static_cast<double>(to.size());
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) h.noalias() += (from[i] - cf) * (to[i] - ct).transpose();

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) throw ComputeError("rank deficient");
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 fix = Mat3::Identity();
  fix(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Mat3 r = v * fix * u.transpose();
  return {r, ct - r * cf};
}

namespace {

double correspond(std::span<const Point3> source, const SceneIndex& target, const RigidTransform& t,
                  std::vector<Point3>& moved, std::vector<Point3>& matched) {
  double sum = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    moved[i] = t.apply(source[i]);
    const Neighbor nn = target.nearest(moved[i]);
    matched[i] = target.point(nn.index);
    sum += nn.squared_distance;
  }
  return std::sqrt(sum / static_cast<double>(source.size()));
}

}  // namespace

RegistrationResult icp_point_to_point(std::span<const Point3> source, const SceneIndex& target,
                                      const RigidTransform& init, std::size_t max_iterations,
                                      double convergence_eps) {
  if (source.empty() || target.size() == 0) throw InputError("registration needs two non-empty clouds");
  if (source.size() < 3 || target.size() < 3) throw ComputeError("rank deficient");

  RegistrationResult res;
  res.transform = init;
  std::vector<Point3> moved(source.size()), matched(source.size());
  res.rmse = correspond(source, target, res.transform, moved, matched);
  res.rmse_history.push_back(res.rmse);

  std::vector<Point3> next_moved(source.size()), next_matched(source.size());
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const RigidTransform step = fit_rigid(moved, matched);
    const RigidTransform candidate = step * res.transform;
    const double rmse = correspond(source, target, candidate, next_moved, next_matched);
    if (rmse > res.rmse) {
      res.converged = true;
      break;
    }
    const double improvement = res.rmse - rmse;
    res.transform = candidate;
    res.rmse = rmse;
    res.iterations = it;
    res.rmse_history.push_back(rmse);
    moved.swap(next_moved);
    matched.swap(next_matched);
    if (improvement < convergence_eps) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace afft
