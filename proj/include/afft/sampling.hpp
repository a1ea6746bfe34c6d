#pragma once

#include <cstdint>
#include <vector>

#include "afft/geometry.hpp"
#include "afft/rng.hpp"

namespace afft {

/// Area-uniform random samples on a mesh surface. The point count is
/// density * area with stochastic rounding; triangles are chosen with
/// probability proportional to their area and points are barycentric-uniform
/// inside each. Normals are the face normals. Throws InputError("empty geometry")
/// on a mesh without faces.
///
/// `face_of`, when given, receives the source face of every sample.
PointCloud sample_mesh_surface(const TriangleMesh& mesh, double density, std::uint64_t seed,
                               std::vector<std::uint32_t>* face_of = nullptr);

/// m distinct indices from [0, n) in draw order (partial Fisher-Yates).
std::vector<std::uint32_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng);

}  // namespace afft
