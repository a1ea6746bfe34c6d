#include "afft/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "afft/error.hpp"

namespace afft {

PointCloud sample_mesh_surface(const TriangleMesh& mesh, double density, std::uint64_t seed,
                               std::vector<std::uint32_t>* face_of) {
  if (mesh.empty()) throw InputError("empty geometry");
  if (!(density > 0.0) || !std::isfinite(density)) throw InputError("sampling density must be positive");
  mesh.validate();

  std::vector<double> cdf(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.triangle_area(f);
    cdf[f] = total;
  }

  Rng rng(seed);
  const double expected = density * total;
  auto count = static_cast<std::size_t>(std::floor(expected));
  if (rng.uniform() < expected - std::floor(expected)) ++count;

  PointCloud out;
  out.points.reserve(count);
  out.normals.reserve(count);
  if (face_of) {
    face_of->clear();
    face_of->reserve(count);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform() * total;
    auto f = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
    f = std::min(f, cdf.size() - 1);
    const auto& [ia, ib, ic] = mesh.faces[f];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Point3& a = mesh.vertices[ia];
    const Point3& b = mesh.vertices[ib];
    const Point3& c = mesh.vertices[ic];
    out.points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
    out.normals.push_back(mesh.face_normal(f));
    if (face_of) face_of->push_back(static_cast<std::uint32_t>(f));
  }
  return out;
}

std::vector<std::uint32_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng) {
  m = std::min(m, n);
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  return pool;
}

}  // namespace afft
