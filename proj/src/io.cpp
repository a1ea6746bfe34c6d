#include "afft/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "afft/error.hpp"
#include "afft/sampling.hpp"

namespace afft::io {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw InputError("write failed: " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError("cannot replace " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string lowercase_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::string at_line(std::size_t line) { return ", line " + std::to_string(line); }

double parse_real(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw InputError("malformed number '" + tok + "'" + at_line(line));
  }
  if (used != tok.size() || !std::isfinite(v)) throw InputError("malformed number '" + tok + "'" + at_line(line));
  return v;
}

long long parse_integer(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    throw InputError("malformed index '" + tok + "'" + at_line(line));
  }
  if (used != tok.size()) throw InputError("malformed index '" + tok + "'" + at_line(line));
  return v;
}

void fan_triangulate(const std::vector<std::uint32_t>& poly, std::vector<Face>& faces, std::size_t line) {
  if (poly.size() < 3) throw InputError("face with fewer than 3 vertices" + at_line(line));
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) faces.push_back({poly[0], poly[k], poly[k + 1]});
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string exact(double v) { return fmt("%.17g", v); }

// ---- PLY ------------------------------------------------------------------

struct PlyProperty {
  std::string name;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyData {
  std::vector<Point3> points;
  std::vector<Vec3> normals;
  std::vector<Face> faces;
  bool has_face_element = false;
};

PlyData parse_ply(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line()) throw InputError("empty file");
  if (line != "ply") throw InputError("not a PLY file" + at_line(line_no));
  std::vector<PlyElement> elements;
  bool ascii = false, header_done = false;
  while (next_line()) {
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
    if (kw == "format") {
      std::string kind;
      ss >> kind;
      if (kind != "ascii") throw InputError("only ASCII PLY is supported" + at_line(line_no));
      ascii = true;
    } else if (kw == "element") {
      PlyElement e;
      long long n = -1;
      ss >> e.name >> n;
      if (e.name.empty() || n < 0) throw InputError("malformed element record" + at_line(line_no));
      e.count = static_cast<std::size_t>(n);
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) throw InputError("property before element" + at_line(line_no));
      PlyProperty p;
      std::string type;
      ss >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ss >> count_type >> item_type;
        p.is_list = true;
      }
      ss >> p.name;
      if (p.name.empty()) throw InputError("malformed property record" + at_line(line_no));
      elements.back().properties.push_back(p);
    } else if (kw == "end_header") {
      header_done = true;
      break;
    } else {
      throw InputError("unknown header record '" + kw + "'" + at_line(line_no));
    }
  }
  if (!header_done) throw InputError("missing end_header");
  if (!ascii) throw InputError("missing format record");

  PlyData out;
  for (const auto& e : elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    if (is_face) out.has_face_element = true;
    std::array<int, 6> slot;  // x y z nx ny nz
    slot.fill(-1);
    int list_slot = -1;
    for (std::size_t i = 0; i < e.properties.size(); ++i) {
      const auto& n = e.properties[i].name;
      static const std::array<const char*, 6> names{"x", "y", "z", "nx", "ny", "nz"};
      for (int k = 0; k < 6; ++k)
        if (n == names[k]) slot[k] = static_cast<int>(i);
      if (is_face && e.properties[i].is_list && (n == "vertex_indices" || n == "vertex_index") && list_slot < 0)
        list_slot = static_cast<int>(i);
    }
    if (is_vertex && (slot[0] < 0 || slot[1] < 0 || slot[2] < 0))
      throw InputError("vertex element lacks x, y or z");
    const bool with_normals = is_vertex && slot[3] >= 0 && slot[4] >= 0 && slot[5] >= 0;
    if (is_face && list_slot < 0) throw InputError("face element lacks vertex_indices");

    for (std::size_t r = 0; r < e.count; ++r) {
      if (!next_line()) throw InputError("unexpected end of file in element '" + e.name + "'");
      if (!is_vertex && !is_face) continue;
      std::istringstream ss(line);
      std::vector<std::string> toks;
      for (std::string t; ss >> t;) toks.push_back(t);
      std::size_t pos = 0;
      std::array<double, 6> vals{};
      std::vector<std::uint32_t> poly;
      for (std::size_t i = 0; i < e.properties.size(); ++i) {
        if (pos >= toks.size()) throw InputError("too few values" + at_line(line_no));
        if (e.properties[i].is_list) {
          const long long cnt = parse_integer(toks[pos++], line_no);
          if (cnt < 0 || pos + static_cast<std::size_t>(cnt) > toks.size())
            throw InputError("malformed list" + at_line(line_no));
          for (long long k = 0; k < cnt; ++k) {
            const long long idx = parse_integer(toks[pos++], line_no);
            if (static_cast<int>(i) == list_slot) {
              if (idx < 0 || static_cast<std::size_t>(idx) >= out.points.size())
                throw InputError("index out of range" + at_line(line_no));
              poly.push_back(static_cast<std::uint32_t>(idx));
            }
          }
        } else {
          const double v = parse_real(toks[pos++], line_no);
          for (int k = 0; k < 6; ++k)
            if (slot[k] == static_cast<int>(i)) vals[k] = v;
        }
      }
      if (is_vertex) {
        out.points.emplace_back(vals[0], vals[1], vals[2]);
        if (with_normals) {
          Vec3 n(vals[3], vals[4], vals[5]);
          const double len = n.norm();
          if (!(len > 0.0)) throw InputError("zero-length normal" + at_line(line_no));
          out.normals.push_back(n / len);
        }
      } else {
        fan_triangulate(poly, out.faces, line_no);
      }
    }
  }
  return out;
}

}  // namespace

TriangleMesh parse_ply_mesh(std::istream& in) {
  PlyData d = parse_ply(in);
  TriangleMesh m;
  m.vertices = std::move(d.points);
  m.faces = std::move(d.faces);
  m.validate();
  return m;
}

PointCloud parse_ply_cloud(std::istream& in) {
  PlyData d = parse_ply(in);
  if (d.points.empty()) throw InputError("cloud has zero vertices");
  PointCloud c{std::move(d.points), std::move(d.normals)};
  c.validate();
  return c;
}

TriangleMesh parse_obj(std::istream& in) {
  TriangleMesh m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw == "v") {
      std::array<double, 3> c{};
      std::string tok;
      for (auto& x : c) {
        if (!(ss >> tok)) throw InputError("vertex needs 3 coordinates" + at_line(line_no));
        x = parse_real(tok, line_no);
      }
      m.vertices.emplace_back(c[0], c[1], c[2]);
    } else if (kw == "f") {
      std::vector<std::uint32_t> poly;
      for (std::string tok; ss >> tok;) {
        const long long raw = parse_integer(tok.substr(0, tok.find('/')), line_no);
        const long long n = static_cast<long long>(m.vertices.size());
        const long long idx = raw > 0 ? raw - 1 : n + raw;
        if (raw == 0 || idx < 0 || idx >= n) throw InputError("index out of range" + at_line(line_no));
        poly.push_back(static_cast<std::uint32_t>(idx));
      }
      fan_triangulate(poly, m.faces, line_no);
    }
  }
  if (m.vertices.empty()) throw InputError("empty geometry");
  m.validate();
  return m;
}

TriangleMesh load_mesh(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  const auto ext = lowercase_extension(path);
  if (ext == ".obj") return parse_obj(in);
  if (ext == ".ply") return parse_ply_mesh(in);
  throw InputError("unsupported mesh format '" + ext + "'");
}

std::string format_obj(const TriangleMesh& mesh) {
  std::string s;
  for (const auto& v : mesh.vertices) s += "v " + exact(v.x()) + " " + exact(v.y()) + " " + exact(v.z()) + "\n";
  for (const auto& f : mesh.faces)
    s += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " + std::to_string(f[2] + 1) + "\n";
  return s;
}

std::string format_ply_mesh(const TriangleMesh& mesh) {
  std::string s = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(mesh.vertices.size()) +
                  "\nproperty double x\nproperty double y\nproperty double z\nelement face " +
                  std::to_string(mesh.faces.size()) + "\nproperty list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices) s += exact(v.x()) + " " + exact(v.y()) + " " + exact(v.z()) + "\n";
  for (const auto& f : mesh.faces)
    s += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
  return s;
}

void save_mesh(const TriangleMesh& mesh, const fs::path& path) {
  const auto ext = lowercase_extension(path);
  if (ext == ".obj") return write_file_atomic(path, format_obj(mesh));
  if (ext == ".ply") return write_file_atomic(path, format_ply_mesh(mesh));
  throw InputError("unsupported mesh format '" + ext + "'");
}

PointCloud load_cloud(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_ply_cloud(in);
}

std::string format_ply_cloud(const PointCloud& cloud) {
  const bool normals = cloud.has_normals();
  std::string s = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                  "\nproperty double x\nproperty double y\nproperty double z\n";
  if (normals) s += "property double nx\nproperty double ny\nproperty double nz\n";
  s += "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    s += exact(p.x()) + " " + exact(p.y()) + " " + exact(p.z());
    if (normals) {
      const auto& n = cloud.normals[i];
      s += " " + exact(n.x()) + " " + exact(n.y()) + " " + exact(n.z());
    }
    s += "\n";
  }
  return s;
}

void save_cloud(const PointCloud& cloud, const fs::path& path) {
  if (cloud.empty()) throw InputError("cloud has zero vertices");
  write_file_atomic(path, format_ply_cloud(cloud));
}

PointCloud load_geometry_as_cloud(const fs::path& path, double density, std::uint64_t seed) {
  const auto ext = lowercase_extension(path);
  if (ext == ".obj") return sample_mesh_surface(load_mesh(path), density, seed);
  if (ext != ".ply") throw InputError("unsupported geometry format '" + ext + "'");
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  PlyData d = parse_ply(in);
  if (d.points.empty()) throw InputError("geometry has zero vertices");
  if (d.has_face_element && !d.faces.empty()) {
    TriangleMesh m{std::move(d.points), std::move(d.faces)};
    m.validate();
    return sample_mesh_surface(m, density, seed);
  }
  PointCloud c{std::move(d.points), std::move(d.normals)};
  c.validate();
  return c;
}

// ---- descriptor -------------------------------------------------------------

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InputError(std::string("field '") + what + "' must hold 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw InputError(std::string("field '") + what + "' must hold 3 numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

json points_json(const std::vector<Point3>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(vec_json(p));
  return a;
}

std::vector<Point3> json_points(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string("field '") + what + "' must be an array");
  std::vector<Point3> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(json_vec(e, what));
  return out;
}

const json& field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw InputError(std::string("descriptor is missing '") + name + "'");
  return *it;
}

}  // namespace

std::string format_descriptor(const AffordanceDescriptor& d) {
  json j;
  j["format_version"] = kDescriptorFormatVersion;
  j["affordance_name"] = d.affordance_name;
  j["n_aff"] = vec_json(d.n_aff);
  j["d_o"] = d.d_o;
  j["anchor"] = vec_json(d.anchor);
  j["s_aff"] = d.s_aff;
  j["w_max_norm"] = d.w_max_norm;
  j["sampling_method"] = std::string(to_string(d.method));
  j["seed"] = d.seed;
  j["query_object_ref"] = d.query_object_ref;
  json kps = json::array();
  for (const auto& k : d.keypoints) kps.push_back({{"b", vec_json(k.position)}, {"p", vec_json(k.provenance)}, {"w", k.weight}});
  j["keypoints"] = std::move(kps);
  if (d.bundle) {
    j["source"] = {{"eps", d.bundle->eps},
                   {"query_object", points_json(d.bundle->query_object)},
                   {"scene_object", points_json(d.bundle->scene_object)},
                   {"bisector", points_json(d.bundle->bisector)}};
  }
  return j.dump(1) + "\n";
}

AffordanceDescriptor parse_descriptor(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("descriptor is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("descriptor must be a JSON object");
  const json& version = field(j, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kDescriptorFormatVersion)
    throw InputError("unsupported descriptor format_version " + version.dump() + " (expected " +
                     std::to_string(kDescriptorFormatVersion) + ")");
  AffordanceDescriptor d;
  try {
    d.affordance_name = field(j, "affordance_name").get<std::string>();
    d.n_aff = json_vec(field(j, "n_aff"), "n_aff");
    d.d_o = field(j, "d_o").get<double>();
    d.anchor = json_vec(field(j, "anchor"), "anchor");
    d.s_aff = field(j, "s_aff").get<double>();
    d.w_max_norm = field(j, "w_max_norm").get<double>();
    d.method = parse_sampling_method(field(j, "sampling_method").get<std::string>());
    d.seed = field(j, "seed").get<std::uint64_t>();
    if (auto it = j.find("query_object_ref"); it != j.end()) d.query_object_ref = it->get<std::string>();
    for (const auto& k : field(j, "keypoints"))
      d.keypoints.push_back({json_vec(field(k, "b"), "b"), json_vec(field(k, "p"), "p"), field(k, "w").get<double>()});
    if (auto it = j.find("source"); it != j.end()) {
      TrainingBundle b;
      b.eps = field(*it, "eps").get<double>();
      b.query_object = json_points(field(*it, "query_object"), "query_object");
      b.scene_object = json_points(field(*it, "scene_object"), "scene_object");
      b.bisector = json_points(field(*it, "bisector"), "bisector");
      d.bundle = std::move(b);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed descriptor: ") + e.what());
  }
  d.validate();
  return d;
}

AffordanceDescriptor load_descriptor(const fs::path& path) { return parse_descriptor(read_file(path)); }

void save_descriptor(const AffordanceDescriptor& d, const fs::path& path) {
  write_file_atomic(path, format_descriptor(d));
}

// ---- pose -------------------------------------------------------------------

RigidTransform parse_pose(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("pose is not valid JSON: ") + e.what());
  }
  const auto r = j.find("rotation");
  const auto t = j.find("translation");
  if (r == j.end() || t == j.end() || !r->is_array() || r->size() != 9)
    throw InputError("pose needs 'rotation' (9 numbers) and 'translation' (3 numbers)");
  RigidTransform pose;
  for (int i = 0; i < 9; ++i) {
    if (!(*r)[i].is_number()) throw InputError("pose rotation must hold 9 numbers");
    pose.rotation(i / 3, i % 3) = (*r)[i].get<double>();
  }
  pose.translation = json_vec(*t, "translation");
  if (!pose.is_valid()) throw InputError("pose rotation is not orthonormal");
  return pose;
}

RigidTransform load_pose(const fs::path& path) { return parse_pose(read_file(path)); }

std::string format_pose(const RigidTransform& t) {
  json r = json::array();
  for (int i = 0; i < 9; ++i) r.push_back(t.rotation(i / 3, i % 3));
  json j;
  j["rotation"] = std::move(r);
  j["translation"] = vec_json(t.translation);
  return j.dump(1) + "\n";
}

void save_pose(const RigidTransform& t, const fs::path& path) { write_file_atomic(path, format_pose(t)); }

// ---- predictions and heatmaps -----------------------------------------------

std::string format_predictions(const std::vector<Prediction>& preds, std::string_view method) {
  std::vector<Prediction> sorted = preds;
  sort_predictions(sorted);
  std::string s = "x,y,z,theta_radians,score,method,keypoints_evaluated\n";
  for (const auto& p : sorted) {
    s += fmt("%.9g", p.location.x()) + "," + fmt("%.9g", p.location.y()) + "," + fmt("%.9g", p.location.z()) + "," +
         fmt("%.9g", p.theta) + "," + fmt("%.9g", p.score) + "," + std::string(method) + "," +
         std::to_string(p.keypoints_evaluated) + "\n";
  }
  return s;
}

void save_predictions(const std::vector<Prediction>& preds, std::string_view method, const fs::path& path) {
  write_file_atomic(path, format_predictions(preds, method));
}

std::vector<PredictionRow> parse_predictions(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line != "x,y,z,theta_radians,score,method,keypoints_evaluated")
    throw InputError("unexpected prediction header");
  ++line_no;
  std::vector<PredictionRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (cells.size() != 7) throw InputError("expected 7 columns" + at_line(line_no));
    PredictionRow r;
    r.location = {parse_real(cells[0], line_no), parse_real(cells[1], line_no), parse_real(cells[2], line_no)};
    r.theta = parse_real(cells[3], line_no);
    r.score = parse_real(cells[4], line_no);
    r.method = cells[5];
    r.keypoints_evaluated = static_cast<std::size_t>(parse_integer(cells[6], line_no));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::array<std::uint8_t, 3> heatmap_color(double score) {
  const double s = std::isfinite(score) ? std::clamp(score, 0.0, 1.0) : 0.0;
  const auto red = static_cast<std::uint8_t>(std::lround(255.0 * s));
  return {red, 0, static_cast<std::uint8_t>(255 - red)};
}

std::string format_heatmap(const AffordanceHeatmap& heatmap) {
  std::string s = "ply\nformat ascii 1.0\ncomment score colormap: red = round(255 s), green = 0, blue = 255 - red\n"
                  "element vertex " + std::to_string(heatmap.entries.size()) +
                  "\nproperty double x\nproperty double y\nproperty double z\n"
                  "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (const auto& e : heatmap.entries) {
    const auto c = heatmap_color(e.score);
    s += exact(e.location.x()) + " " + exact(e.location.y()) + " " + exact(e.location.z()) + " " +
         std::to_string(c[0]) + " " + std::to_string(c[1]) + " " + std::to_string(c[2]) + "\n";
  }
  return s;
}

void save_heatmap(const AffordanceHeatmap& heatmap, const fs::path& path) {
  if (heatmap.entries.empty()) throw InputError("heatmap is empty");
  write_file_atomic(path, format_heatmap(heatmap));
}

}  // namespace afft::io
