#include <algorithm>
#include <cmath>
#include <map>

#include "afft/error.hpp"
#include "afft/sampling.hpp"
#include "afft/synthgen.hpp"
#include "doctest.h"
#include "afft/descriptor.hpp"
#include "support/oracles.hpp"

using namespace afft;

namespace {

// Tensor points at (i, 0, 1) with the given weights, all pointing at the origin.
struct Toy {
  InteractionTensor tensor;
  InteractionExample example;
};

Toy toy(const std::vector<double>& weights) {
  Toy t;
  t.example.scene_object.points = {Point3::Zero()};
  t.example.query_object.points = {Point3(0, 0, 2)};
  t.example.affordance_name = "toy";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    TensorPoint tp;
    tp.position = Point3(static_cast<double>(i), 0, 1);
    tp.provenance = -tp.position;
    tp.raw_weight = tp.provenance.norm();
    tp.weight = weights[i];
    t.tensor.points.push_back(tp);
  }
  t.tensor.trim_radius = 1.0;
  t.tensor.eps = 1e-3;
  return t;
}

std::size_t source_of(const AffordanceDescriptor& d, const AffordanceKeypoint& k) {
  return static_cast<std::size_t>(std::lround(d.frame().inverse().apply(k.position).x()));
}

DescriptorOptions options(std::size_t n, std::uint64_t seed, SamplingMethod m = SamplingMethod::WeightDriven) {
  DescriptorOptions o;
  o.n = n;
  o.seed = seed;
  o.method = m;
  o.bundle = false;
  return o;
}

struct Real {
  InteractionExample example;
  InteractionTensor tensor;
};

const Real& real() {
  static const Real r = [] {
    Real out;
    out.example.query_object = sample_mesh_surface(shapes::sphere({0, 0, 0}, 0.05, 20), 1e4, 1);
    out.example.scene_object = sample_mesh_surface(shapes::quad({-0.15, -0.15, 0}, {0.3, 0, 0}, {0, 0.3, 0}), 1e4, 2);
    out.example.pose = RigidTransform::from_translation({0, 0, 0.06});
    out.example.affordance_name = "placing";
    out.tensor = compute_tensor(out.example, 0.0, 0);
    return out;
  }();
  return r;
}

}  // namespace

TEST_CASE("sampling probabilities") {
  const std::vector<double> w{1, 1, 2};
  const auto p = sampling_probabilities(w);
  CHECK_FALSE(p.uniform_fallback);
  CHECK(p.values == std::vector<double>{0.25, 0.25, 0.5});
  const std::vector<double> z{0, 0, 0, 0};
  const auto q = sampling_probabilities(z);
  CHECK(q.uniform_fallback);
  CHECK(q.values == std::vector<double>(4, 0.25));
  const std::vector<double> bad{1, -1};
  CHECK_THROWS_AS(sampling_probabilities(bad), InputError);
  CHECK_THROWS_AS(sampling_probabilities(std::span<const double>{}), InputError);
}

TEST_CASE("equal weights draw uniformly") {
  const Toy t = toy(std::vector<double>(10, 0.5));
  std::vector<double> hits(10, 0.0);
  constexpr int trials = 20000;
  for (int s = 0; s < trials; ++s) {
    const auto d = sample_descriptor(t.tensor, t.example, options(1, s));
    hits[source_of(d, d.keypoints[0])] += 1;
  }
  const std::vector<double> expected(10, trials / 10.0);
  CHECK(testing::chi_square(hits, expected) < testing::chi_square_critical_01(9));
}

TEST_CASE("a single non-zero weight is always drawn first") {
  std::vector<double> w(8, 0.0);
  w[3] = 1.0;
  const Toy t = toy(w);
  for (int s = 0; s < 200; ++s) {
    const auto d = sample_descriptor(t.tensor, t.example, options(1, s));
    REQUIRE(source_of(d, d.keypoints[0]) == 3);
  }
  // Exhausting the positive weights falls back to the zero-weight points.
  const auto d = sample_descriptor(t.tensor, t.example, options(8, 5));
  CHECK(d.keypoints.size() == 8);
  CHECK(source_of(d, d.keypoints[0]) == 3);
}

TEST_CASE("draw frequencies follow the weights") {
  const std::vector<double> w{0.6, 0.3, 0.1};
  const Toy t = toy(w);
  constexpr int trials = 30000;
  std::vector<int> hits(3, 0);
  for (int s = 0; s < trials; ++s) {
    const auto d = sample_descriptor(t.tensor, t.example, options(1, s));
    ++hits[source_of(d, d.keypoints[0])];
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double sigma = std::sqrt(trials * w[i] * (1 - w[i]));
    CHECK(std::abs(hits[i] - trials * w[i]) <= 3 * sigma);
  }
}

TEST_CASE("keypoint order, frame and reproducibility") {
  const Real& r = real();
  DescriptorOptions o;
  o.n = 64;
  o.seed = 3;
  const auto a = sample_descriptor(r.tensor, r.example, o);
  const auto b = sample_descriptor(r.tensor, r.example, o);
  REQUIRE(a.keypoints.size() == 64);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(a.keypoints[i].position == b.keypoints[i].position);
    if (i) CHECK(a.keypoints[i].weight <= a.keypoints[i - 1].weight);
  }
  CHECK(a.w_max_norm == a.keypoints.front().weight);
  CHECK(a.d_o == r.tensor.trim_radius);
  CHECK_NOTHROW(a.validate());

  // The anchor is the scene point of the tightest contact.
  const auto tight = std::min_element(r.tensor.points.begin(), r.tensor.points.end(),
                                      [](auto& x, auto& y) { return x.raw_weight < y.raw_weight; });
  CHECK(a.anchor == r.example.scene_object.points[tight->scene_index]);
  CHECK(a.frame().apply(a.anchor).norm() <= 1e-12);
  CHECK((a.frame().rotate(a.n_aff) - Vec3::UnitZ()).norm() <= 1e-12);

  o.seed = 4;
  const auto c = sample_descriptor(r.tensor, r.example, o);
  bool differs = false;
  for (std::size_t i = 0; i < 64; ++i) differs = differs || c.keypoints[i].position != a.keypoints[i].position;
  CHECK(differs);
}

TEST_CASE("descriptor size limits") {
  const Real& r = real();
  DescriptorOptions o;
  o.n = 0;
  CHECK_THROWS_AS(sample_descriptor(r.tensor, r.example, o), InputError);
  o.n = r.tensor.points.size() + 1;
  CHECK_THROWS_AS(sample_descriptor(r.tensor, r.example, o), InputError);
  o.n = r.tensor.points.size();
  CHECK(sample_descriptor(r.tensor, r.example, o).keypoints.size() == r.tensor.points.size());
}

TEST_CASE("weighted draws favour close contact") {
  const Real& r = real();
  double weighted = 0.0, uniform = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    for (auto m : {SamplingMethod::WeightDriven, SamplingMethod::Uniform}) {
      const auto d = sample_descriptor(r.tensor, r.example, options(64, s, m));
      double mean = 0.0;
      for (const auto& k : d.keypoints) mean += k.weight / 64.0;
      (m == SamplingMethod::Uniform ? uniform : weighted) += mean;
    }
  }
  CHECK(weighted >= uniform);
}

TEST_CASE("source checks catch corruption") {
  const Real& r = real();
  DescriptorOptions o;
  o.n = 128;
  const auto fresh = sample_descriptor(r.tensor, r.example, o);
  for (const auto& c : check_against_source(fresh)) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);

  auto failed = [](const AffordanceDescriptor& d, const std::string& name) {
    for (const auto& c : check_against_source(d))
      if (c.name == name) return !c.passed;
    return false;
  };
  auto moved = fresh;
  moved.keypoints[5].position += Vec3(0, 0, 0.05);
  CHECK(failed(moved, "equidistance"));
  auto bent = fresh;
  bent.keypoints[7].provenance += Vec3(0.01, 0, 0);
  CHECK(failed(bent, "provenance"));
  auto shuffled = fresh;
  std::swap(shuffled.keypoints.front(), shuffled.keypoints.back());
  CHECK(failed(shuffled, "keypoint order"));
  auto heavy = fresh;
  heavy.keypoints[0].weight = 1.5;
  CHECK(failed(heavy, "weight range"));
}

TEST_CASE("method names and default normals") {
  CHECK(parse_sampling_method("uniform") == SamplingMethod::Uniform);
  CHECK(parse_sampling_method("weighted") == SamplingMethod::WeightDriven);
  CHECK_THROWS_AS(parse_sampling_method("random"), InputError);
  CHECK(*default_n_aff("placing") == Vec3::UnitZ());
  CHECK(*default_n_aff("filling") == -Vec3::UnitZ());
  CHECK_FALSE(default_n_aff("juggling").has_value());
  for (const Vec3& n : {Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(1, 2, 3).normalized()})
    CHECK((descriptor_rotation(n).rotate(n) - Vec3::UnitZ()).norm() <= 1e-12);
}
