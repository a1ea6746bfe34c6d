#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "afft/descriptor.hpp"
#include "afft/geometry.hpp"
#include "afft/query.hpp"

namespace afft::io {

inline constexpr int kDescriptorFormatVersion = 1;

/// Writes `content` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Meshes: OBJ (v/f, 1-based or negative indices, polygons fan-split) and ASCII PLY.
TriangleMesh parse_obj(std::istream& in);
TriangleMesh parse_ply_mesh(std::istream& in);
TriangleMesh load_mesh(const std::filesystem::path& path);
std::string format_obj(const TriangleMesh& mesh);
std::string format_ply_mesh(const TriangleMesh& mesh);
/// Format picked from the extension (.obj or .ply).
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

// Clouds: ASCII PLY with optional nx,ny,nz (colors are read and ignored).
PointCloud parse_ply_cloud(std::istream& in);
PointCloud load_cloud(const std::filesystem::path& path);
std::string format_ply_cloud(const PointCloud& cloud);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path);

/// Meshes (OBJ, or PLY with faces) are surface-sampled at `density` points
/// per square metre; face-less PLY vertices are taken as the cloud.
PointCloud load_geometry_as_cloud(const std::filesystem::path& path, double density, std::uint64_t seed);

std::string format_descriptor(const AffordanceDescriptor& d);
AffordanceDescriptor parse_descriptor(std::string_view text);
AffordanceDescriptor load_descriptor(const std::filesystem::path& path);
void save_descriptor(const AffordanceDescriptor& d, const std::filesystem::path& path);

/// {"rotation": [9 reals, row-major], "translation": [3 reals]}
RigidTransform parse_pose(std::string_view text);
RigidTransform load_pose(const std::filesystem::path& path);
std::string format_pose(const RigidTransform& t);
void save_pose(const RigidTransform& t, const std::filesystem::path& path);

/// Header x,y,z,theta_radians,score,method,keypoints_evaluated; 9 significant digits.
std::string format_predictions(const std::vector<Prediction>& preds, std::string_view method);
void save_predictions(const std::vector<Prediction>& preds, std::string_view method,
                      const std::filesystem::path& path);

struct PredictionRow {
  Point3 location;
  double theta = 0.0;
  double score = 0.0;
  std::string method;
  std::size_t keypoints_evaluated = 0;
};
std::vector<PredictionRow> parse_predictions(std::string_view text);

/// Linear blue-to-red map: red = round(255 s), green = 0, blue = 255 - red,
/// with s clamped to [0, 1].
std::array<std::uint8_t, 3> heatmap_color(double score);
std::string format_heatmap(const AffordanceHeatmap& heatmap);
void save_heatmap(const AffordanceHeatmap& heatmap, const std::filesystem::path& path);

}  // namespace afft::io
