#include "afft/normals.hpp"

#include <Eigen/Eigenvalues>

#include "afft/error.hpp"

namespace afft {

std::optional<Vec3> estimate_normal_at(const SceneIndex& index, const Point3& query, std::size_t k,
                                       const Vec3& hint) {
  const auto nbrs = index.k_nearest(query, k);
  if (nbrs.size() < 3) return std::nullopt;

  Point3 mean = Point3::Zero();
  for (const auto& n : nbrs) mean += index.point(n.index);
  mean /= static_cast<double>(nbrs.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& n : nbrs) {
    const Vec3 d = index.point(n.index) - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(nbrs.size());

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const auto& ev = eig.eigenvalues();  // ascending
  // Rank <= 1: all points coincide or lie on a line, so no plane is defined.
  if (!(ev[2] > 0.0) || ev[1] <= 1e-10 * ev[2]) return std::nullopt;

  Vec3 normal = eig.eigenvectors().col(0).normalized();
  if (normal.dot(hint) < 0.0) normal = -normal;
  return normal;
}

NormalEstimate estimate_normals(const PointCloud& cloud, std::size_t k, const Vec3& orientation_hint,
                                Exec exec) {
  if (k < 3) throw InputError("normal estimation needs k >= 3");
  if (cloud.size() < k) throw InputError("normal estimation needs at least k points");
  const SceneIndex index(cloud);
  const Vec3 fallback = orientation_hint.norm() > 0.0 ? orientation_hint.normalized() : Vec3::UnitZ();

  const auto n = static_cast<std::ptrdiff_t>(cloud.size());
  std::vector<Vec3> normals(cloud.size());
  std::vector<char> ok(cloud.size(), 0);
  auto body = [&](std::ptrdiff_t i) {
    if (auto nrm = estimate_normal_at(index, cloud.points[i], k, orientation_hint)) {
      normals[i] = *nrm;
      ok[i] = 1;
    } else {
      normals[i] = fallback;
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
  }

  NormalEstimate out;
  out.cloud.points = cloud.points;
  out.cloud.normals = std::move(normals);
  out.valid.assign(ok.begin(), ok.end());
  return out;
}

}  // namespace afft
