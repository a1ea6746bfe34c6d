#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "afft/descriptor.hpp"
#include "afft/icp.hpp"
#include "afft/query.hpp"

namespace afft {

struct BaselineConfig {
  std::size_t max_iterations = 50;
  double convergence_eps = 1e-6;
  std::size_t max_source_points = 512;     // ICP source subsample
  std::size_t test_bisector_points = 2048;  // bisector size per tested pose
  std::uint64_t seed = 0;
};

/// Deterministic subsample of at most `count` points (all of them if fewer).
std::vector<Point3> subsample_points(std::span<const Point3> points, std::size_t count, std::uint64_t seed);

/// Residual of registering the example bisector against the bisector computed
/// between the posed query object and `local`. +inf when it cannot be computed.
double bisector_similarity_rmse(const AffordanceDescriptor& descriptor, const SceneIndex& local,
                                const RigidTransform& pose, const BaselineConfig& cfg);

/// Residual of registering the posed query object directly onto `local`.
double naive_icp_rmse(const AffordanceDescriptor& descriptor, const SceneIndex& local, const RigidTransform& pose,
                      const BaselineConfig& cfg);

/// Residuals of the two baselines at the exact training placement, used to
/// calibrate their acceptance thresholds.
double reference_bisector_rmse(const AffordanceDescriptor& descriptor, const BaselineConfig& cfg);
double reference_naive_rmse(const AffordanceDescriptor& descriptor, const BaselineConfig& cfg);

inline constexpr double kBisectorThresholdFactor = 2.0;
inline constexpr double kNaiveThresholdFactor = 1.25;

/// Full query loops of the baselines. A pose is accepted iff rmse <= threshold
/// and scored max(0, 1 - rmse / threshold). threshold <= 0 selects the
/// calibrated default. Both need the training bundle.
QueryResult bs_baseline_query(const AffordanceDescriptor& descriptor, const PointCloud& scene, const QueryConfig& cfg,
                              double threshold = 0.0, const BaselineConfig& bcfg = {}, Exec exec = Exec::Parallel);
QueryResult naive_baseline_query(const AffordanceDescriptor& descriptor, const PointCloud& scene,
                                 const QueryConfig& cfg, double threshold = 0.0, const BaselineConfig& bcfg = {},
                                 Exec exec = Exec::Parallel);

}  // namespace afft
