#include <cmath>
#include <filesystem>
#include <sstream>

#include "afft/error.hpp"
#include "afft/io.hpp"
#include "afft/sampling.hpp"
#include "doctest.h"
#include "support/oracles.hpp"
#include "support/small.hpp"

using namespace afft;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "afft_test_io";
  fs::create_directories(dir);
  return dir / name;
}

template <class F>
TriangleMesh parse_text(F parse, const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

}  // namespace

TEST_CASE("obj parsing") {
  const auto m = parse_text(io::parse_obj, "# square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1 2 3 4\n");
  CHECK(m.vertices.size() == 4);
  REQUIRE(m.faces.size() == 2);
  CHECK(m.surface_area() == doctest::Approx(1.0));
  const auto neg = parse_text(io::parse_obj, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3/1/1 -2/2/2 -1/3/3\n");
  CHECK(neg.faces.size() == 1);
  CHECK(neg.faces[0] == Face{0, 1, 2});
  CHECK_THROWS_WITH_AS(parse_text(io::parse_obj, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n"),
                       "index out of range, line 4", InputError);
  CHECK_THROWS_AS(parse_text(io::parse_obj, "v 0 0 zero\n"), InputError);
  CHECK_THROWS_AS(parse_text(io::parse_obj, ""), InputError);
}

TEST_CASE("ply mesh parsing") {
  const std::string tri =
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n2 0 0\n0 2 0\n3 0 1 2\n";
  const auto m = parse_text(io::parse_ply_mesh, tri);
  CHECK(m.surface_area() == doctest::Approx(2.0));
  std::string bad = tri;
  bad.replace(bad.rfind("3 0 1 2"), 7, "3 0 1 9");
  CHECK_THROWS_WITH_AS(parse_text(io::parse_ply_mesh, bad), "index out of range, line 13", InputError);
  CHECK_THROWS_WITH_AS(parse_text(io::parse_ply_mesh, ""), "empty file", InputError);
  std::string binary = tri;
  binary.replace(binary.find("ascii"), 5, "binary_little_endian");
  CHECK_THROWS_AS(parse_text(io::parse_ply_mesh, binary), InputError);
}

TEST_CASE("ply clouds") {
  std::istringstream one(
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n1 2 3 255 0 0\n");
  const PointCloud c = io::parse_ply_cloud(one);
  REQUIRE(c.size() == 1);
  CHECK(c.points[0] == Point3(1, 2, 3));
  CHECK_FALSE(c.has_normals());

  std::istringstream none("ply\nformat ascii 1.0\nelement vertex 0\nproperty double x\nproperty double y\n"
                          "property double z\nend_header\n");
  CHECK_THROWS_AS(io::parse_ply_cloud(none), InputError);

  PointCloud cloud;
  cloud.points = testing::random_points(300, 8, 10.0);
  for (std::size_t i = 0; i < cloud.size(); ++i) cloud.normals.push_back(Vec3(1, i % 7, 2).normalized());
  const fs::path path = scratch("cloud.ply");
  io::save_cloud(cloud, path);
  const PointCloud back = io::load_cloud(path);
  REQUIRE(back.size() == cloud.size());
  REQUIRE(back.has_normals());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK((back.points[i] - cloud.points[i]).norm() <= 1e-6);
    CHECK((back.normals[i] - cloud.normals[i]).norm() <= 1e-6);
  }
}

TEST_CASE("mesh files round trip") {
  const TriangleMesh box = shapes::box({0, 0, 0}, {1, 2, 3});
  for (const char* name : {"box.obj", "box.ply"}) {
    const fs::path path = scratch(name);
    io::save_mesh(box, path);
    const TriangleMesh back = io::load_mesh(path);
    CHECK(back.faces == box.faces);
    REQUIRE(back.vertices.size() == box.vertices.size());
    for (std::size_t i = 0; i < box.vertices.size(); ++i) CHECK((back.vertices[i] - box.vertices[i]).norm() <= 1e-9);
    const PointCloud sampled = io::load_geometry_as_cloud(path, 100.0, 1);
    CHECK(sampled.size() > 0);
  }
  CHECK_THROWS_AS(io::load_mesh(scratch("box.stl")), InputError);
  CHECK_THROWS_AS(io::load_mesh(scratch("missing.obj")), InputError);
}

TEST_CASE("descriptor files round trip byte for byte") {
  const auto& d = testing::ball_on_plate().descriptor;
  const std::string text = io::format_descriptor(d);
  const AffordanceDescriptor back = io::parse_descriptor(text);
  CHECK(io::format_descriptor(back) == text);
  REQUIRE(back.keypoints.size() == d.keypoints.size());
  for (std::size_t i = 0; i < d.keypoints.size(); ++i) {
    CHECK(back.keypoints[i].position == d.keypoints[i].position);
    CHECK(back.keypoints[i].provenance == d.keypoints[i].provenance);
    CHECK(back.keypoints[i].weight == d.keypoints[i].weight);
  }
  CHECK(back.n_aff == d.n_aff);
  CHECK(back.d_o == d.d_o);
  CHECK(back.bundle.has_value());

  const fs::path path = scratch("d.json");
  io::save_descriptor(d, path);
  CHECK(io::read_file(path) == text);
  CHECK(io::format_descriptor(io::load_descriptor(path)) == text);

  std::string future = text;
  const auto at = future.find("\"format_version\": 1");
  REQUIRE(at != std::string::npos);
  future.replace(at, 19, "\"format_version\": 2");
  CHECK_THROWS_AS(io::parse_descriptor(future), InputError);
  CHECK_THROWS_AS(io::parse_descriptor("{not json"), InputError);
  CHECK_THROWS_AS(io::parse_descriptor("{\"format_version\": 1}"), InputError);
}

TEST_CASE("pose files") {
  const RigidTransform t = RigidTransform::from_translation({0.1, -2, 3}) * rotation_about_axis({1, 1, 0}, 0.4);
  const RigidTransform back = io::parse_pose(io::format_pose(t));
  CHECK((back.rotation - t.rotation).norm() <= 1e-15);
  CHECK(back.translation == t.translation);
  CHECK_THROWS_AS(io::parse_pose("{\"rotation\": [1,0,0,0,1,0,0,0,1]}"), InputError);
  CHECK_THROWS_AS(io::parse_pose("{\"rotation\": [2,0,0,0,1,0,0,0,1], \"translation\": [0,0,0]}"), InputError);
}

TEST_CASE("prediction files") {
  std::vector<Prediction> preds(3);
  preds[0].location = {1.0 / 3.0, 0, 0};
  preds[0].score = 0.5;
  preds[1].location = {2, 0, 0};
  preds[1].score = 0.875;
  preds[1].theta = M_PI;
  preds[1].keypoints_evaluated = 40;
  preds[2].location = {0, 0, 0};
  preds[2].score = 0.5;
  const std::string csv = io::format_predictions(preds, "it");
  CHECK(csv.rfind("x,y,z,theta_radians,score,method,keypoints_evaluated\n", 0) == 0);
  CHECK(csv.find("0.333333333,") != std::string::npos);
  CHECK(csv.find("3.14159265,0.875,it,40") != std::string::npos);
  const auto rows = io::parse_predictions(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].score == 0.875);
  CHECK(rows[1].location.x() == 0.0);  // equal scores ordered by location
  CHECK(rows[2].location.x() == doctest::Approx(1.0 / 3.0));
  CHECK(rows[0].method == "it");
  CHECK(io::parse_predictions(io::format_predictions({}, "bs")).empty());
  CHECK_THROWS_AS(io::parse_predictions("a,b\n"), InputError);
}

TEST_CASE("heatmap colours") {
  CHECK(io::heatmap_color(0.0) == std::array<std::uint8_t, 3>{0, 0, 255});
  CHECK(io::heatmap_color(1.0) == std::array<std::uint8_t, 3>{255, 0, 0});
  CHECK(io::heatmap_color(0.5) == std::array<std::uint8_t, 3>{128, 0, 127});
  CHECK(io::heatmap_color(3.0) == io::heatmap_color(1.0));
  CHECK(io::heatmap_color(-1.0) == io::heatmap_color(0.0));

  AffordanceHeatmap h;
  h.entries.push_back({{0, 0, 0}, 0.25, 0});
  h.entries.push_back({{1, 0, 0}, 1.0, 1});
  const fs::path path = scratch("heat.ply");
  io::save_heatmap(h, path);
  const PointCloud back = io::load_cloud(path);
  CHECK(back.size() == 2);
  CHECK(io::read_file(path).find("\n1 0 0 255 0 0\n") != std::string::npos);
  CHECK_THROWS_AS(io::save_heatmap(AffordanceHeatmap{}, scratch("empty.ply")), InputError);
}

TEST_CASE("atomic writes leave no temp files") {
  const fs::path dir = scratch("atomic");
  fs::remove_all(dir);
  fs::create_directories(dir);
  io::write_file_atomic(dir / "a.txt", "first");
  io::write_file_atomic(dir / "a.txt", "second");
  CHECK(io::read_file(dir / "a.txt") == "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK_THROWS_AS(io::write_file_atomic(dir / "no" / "such" / "dir.txt", "x"), InputError);
}
