#include "afft/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "afft/baselines.hpp"
#include "afft/descriptor.hpp"
#include "afft/error.hpp"
#include "afft/io.hpp"
#include "afft/parallel.hpp"
#include "afft/query.hpp"
#include "afft/rng.hpp"
#include "afft/sampling.hpp"
#include "afft/synthgen.hpp"
#include "afft/tensor.hpp"

namespace afft::cli {

namespace {

Vec3 parse_vec3(const std::string& text, const char* flag) {
  std::array<double, 3> v{};
  std::istringstream ss(text);
  std::string cell;
  int i = 0;
  while (std::getline(ss, cell, ',')) {
    if (i >= 3) throw InputError(std::string(flag) + " expects X,Y,Z");
    std::size_t used = 0;
    try {
      v[i] = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw InputError(std::string(flag) + " expects X,Y,Z");
    }
    if (used != cell.size()) throw InputError(std::string(flag) + " expects X,Y,Z");
    ++i;
  }
  if (i != 3) throw InputError(std::string(flag) + " expects X,Y,Z");
  const Vec3 out(v[0], v[1], v[2]);
  if (!is_finite(out) || !(out.norm() > 0.0)) throw InputError(std::string(flag) + " must be a non-zero vector");
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct TrainArgs {
  std::string preset, query, scene, pose, affordance, n_aff, out, sampling = "weighted";
  std::size_t n = 512;
  std::optional<double> s_aff, eps;
  std::uint64_t seed = 0;
  double density = 1e4;
  bool no_source = false;
};

int do_train(const TrainArgs& a, std::ostream& out) {
  if (a.n == 0) throw InputError("--n must be at least 1");
  InteractionExample example;
  Vec3 n_aff = Vec3::UnitZ();
  double s_aff = 0.5;
  std::string ref;
  bool have_n_aff = false;

  if (!a.preset.empty()) {
    const auto fixture = find_training_fixture(a.preset);
    if (!fixture) throw InputError("unknown preset '" + a.preset + "'");
    example = build_training_example(*fixture);
    n_aff = fixture->n_aff;
    s_aff = fixture->s_aff;
    ref = "preset:" + a.preset;
    have_n_aff = true;
  } else {
    if (a.query.empty() || a.scene.empty() || a.pose.empty())
      throw InputError("train needs --preset, or --query, --scene and --pose");
    if (a.affordance.empty()) throw InputError("--affordance is required without --preset");
    example.query_object = io::load_geometry_as_cloud(a.query, a.density, mix_seed(a.seed, 1));
    example.scene_object = io::load_geometry_as_cloud(a.scene, a.density, mix_seed(a.seed, 2));
    example.pose = io::load_pose(a.pose);
    example.affordance_name = a.affordance;
    ref = a.query;
    if (auto d = default_n_aff(a.affordance)) {
      n_aff = *d;
      have_n_aff = true;
    }
  }
  if (!a.affordance.empty()) example.affordance_name = a.affordance;
  if (!a.n_aff.empty()) {
    n_aff = parse_vec3(a.n_aff, "--n-aff");
    have_n_aff = true;
  }
  if (!have_n_aff) throw InputError("--n-aff is required for affordance '" + example.affordance_name + "'");
  if (a.s_aff) s_aff = *a.s_aff;
  if (!(s_aff > 0.0 && s_aff <= 1.0)) throw InputError("--s-aff must lie in (0, 1]");

  example.validate();
  const InteractionTensor tensor = compute_tensor(example, a.eps.value_or(0.0), a.seed);

  DescriptorOptions opts;
  opts.method = parse_sampling_method(a.sampling);
  opts.n = a.n;
  opts.n_aff = n_aff;
  opts.s_aff = s_aff;
  opts.seed = a.seed;
  opts.query_object_ref = ref;
  opts.bundle = !a.no_source;
  const AffordanceDescriptor d = sample_descriptor(tensor, example, opts);
  io::save_descriptor(d, a.out);

  out << "query points " << example.query_object.size() << ", scene points " << example.scene_object.size() << "\n";
  out << "tensor points " << tensor.points.size() << ", trim radius " << num(tensor.trim_radius) << ", eps "
      << num(tensor.eps) << ", raw weight [" << num(tensor.w_min) << ", " << num(tensor.w_max) << "]\n";
  out << "descriptor " << d.affordance_name << ": " << d.size() << " keypoints (" << to_string(d.method)
      << "), d_o " << num(d.d_o) << ", s_aff " << num(d.s_aff) << "\n";
  return kOk;
}

struct QueryArgs {
  std::string descriptor, scene, method = "it", out, heatmap, up = "0,0,1";
  double sample_frac = 0.30, density = 1e4;
  std::size_t orientations = 8;
  std::uint64_t seed = 0;
  std::optional<double> nms, threshold;
  bool full_scoring = false;
};

int do_query(const QueryArgs& a, std::ostream& out) {
  const AffordanceDescriptor d = io::load_descriptor(a.descriptor);
  const PointCloud scene = io::load_geometry_as_cloud(a.scene, a.density, a.seed);

  QueryConfig cfg;
  cfg.sample_fraction = a.sample_frac;
  cfg.orientations = a.orientations;
  cfg.seed = a.seed;
  cfg.nms_radius = a.nms;
  cfg.up_vector = parse_vec3(a.up, "--up").normalized();
  cfg.early_exit = !a.full_scoring;
  cfg.validate();

  QueryResult r;
  if (a.method == "it") {
    r = run_query(d, scene, cfg);
  } else if (a.method == "bs" || a.method == "naive") {
    BaselineConfig b;
    b.seed = a.seed;
    const double thr = a.threshold.value_or(0.0);
    r = a.method == "bs" ? bs_baseline_query(d, scene, cfg, thr, b) : naive_baseline_query(d, scene, cfg, thr, b);
  } else {
    throw InputError("unknown --method '" + a.method + "' (it, bs or naive)");
  }

  io::save_predictions(r.predictions, a.method, a.out);
  if (!a.heatmap.empty()) io::save_heatmap(r.heatmap, a.heatmap);
  out << "candidates " << r.stats.sampled << ", pruned " << r.stats.pruned << ", accepted " << r.stats.accepted
      << "\n";
  if (!r.predictions.empty())
    out << "best score " << num(r.predictions.front().score) << " at " << num(r.predictions.front().location.x())
        << "," << num(r.predictions.front().location.y()) << "," << num(r.predictions.front().location.z()) << "\n";
  return kOk;
}

struct SynthArgs {
  std::string preset, out;
  std::uint64_t seed = 0;
  double perturb = 0.0;
  std::optional<double> density;
  bool no_supports = false;
};

int do_synth(const SynthArgs& a, std::ostream& out) {
  const auto kind = parse_scene_kind(a.preset);
  if (!kind) throw InputError("unknown preset '" + a.preset + "'");
  ScenePreset p;
  p.kind = *kind;
  p.seed = a.seed;
  p.perturbation = a.perturb;
  p.with_supports = !a.no_supports;
  const TriangleMesh mesh = generate_scene(p);
  if (a.density) {
    const PointCloud cloud = sample_mesh_surface(mesh, *a.density, a.seed);
    io::save_cloud(cloud, a.out);
    out << "wrote " << cloud.size() << " points to " << a.out << "\n";
  } else {
    io::save_mesh(mesh, a.out);
    out << "wrote " << mesh.vertices.size() << " vertices, " << mesh.faces.size() << " faces to " << a.out << "\n";
  }
  return kOk;
}

int do_validate(const std::string& path, std::ostream& out) {
  const AffordanceDescriptor d = io::load_descriptor(path);
  if (!d.bundle) out << "note: descriptor carries no training source; only structural checks run\n";
  int code = kOk;
  for (const auto& c : check_against_source(d)) {
    out << (c.passed ? "ok   " : "FAIL ") << c.name;
    if (!c.passed) {
      out << " (" << c.failures << " failures, first at " << c.detail << ")";
      code = kValidateFailed;
    }
    out << "\n";
  }
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn geometric affordances from one example and find them in new scenes", "afft"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Build a descriptor from a training interaction");
  train->add_option("--preset", ta.preset, "Built-in training fixture (" + [] {
    std::string s;
    for (const auto& n : training_fixture_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }() + ")");
  train->add_option("--query", ta.query, "Query-object geometry (OBJ or PLY)");
  train->add_option("--scene", ta.scene, "Scene-object geometry (OBJ or PLY)");
  train->add_option("--pose", ta.pose, "Pose of the query object relative to the scene");
  train->add_option("--affordance", ta.affordance, "Affordance label");
  train->add_option("--n", ta.n, "Number of keypoints")->capture_default_str();
  train->add_option("--sampling", ta.sampling, "uniform or weighted")->capture_default_str();
  train->add_option("--n-aff", ta.n_aff, "Expected scene normal X,Y,Z");
  train->add_option("--s-aff", ta.s_aff, "Normalized acceptance score");
  train->add_option("--seed", ta.seed)->capture_default_str();
  train->add_option("--density", ta.density, "Mesh sampling density, points per m^2")->capture_default_str();
  train->add_option("--eps", ta.eps, "Bisector equidistance tolerance (m)");
  train->add_flag("--no-source", ta.no_source, "Do not embed the training geometry");
  train->add_option("--out", ta.out, "Descriptor file")->required();

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Find affordance locations in a scene");
  query->add_option("--descriptor", qa.descriptor)->required();
  query->add_option("--scene", qa.scene, "Scene cloud (PLY) or mesh (OBJ/PLY)")->required();
  query->add_option("--method", qa.method, "it, bs or naive")->capture_default_str();
  query->add_option("--sample-frac", qa.sample_frac)->capture_default_str();
  query->add_option("--orientations", qa.orientations)->capture_default_str();
  query->add_option("--seed", qa.seed)->capture_default_str();
  query->add_option("--out", qa.out, "Prediction CSV")->required();
  query->add_option("--heatmap", qa.heatmap, "Heatmap PLY");
  query->add_option("--nms", qa.nms, "Suppression radius (m)");
  query->add_option("--up", qa.up, "Scene up vector X,Y,Z")->capture_default_str();
  query->add_option("--density", qa.density, "Mesh sampling density, points per m^2")->capture_default_str();
  query->add_option("--threshold", qa.threshold, "Baseline rmse threshold (m)");
  query->add_flag("--full-scoring", qa.full_scoring, "Score every keypoint of every pose");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  synth->add_option("--preset", sa.preset,
                    "table-top, hanging-rack, faucet-sink, penetration-block, room-composite or motorbike")
      ->required();
  synth->add_option("--seed", sa.seed)->capture_default_str();
  synth->add_option("--perturb", sa.perturb, "Geometry perturbation")->capture_default_str();
  synth->add_option("--density", sa.density, "Write a sampled cloud at this density instead of the mesh");
  synth->add_flag("--no-supports", sa.no_supports, "Omit legs and posts");
  synth->add_option("--out", sa.out, "OBJ or PLY path")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a descriptor against its training source");
  validate->add_option("--descriptor", validate_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kInputError;
  }

  configure_threads_from_env();
  try {
    if (train->parsed()) return do_train(ta, out);
    if (query->parsed()) return do_query(qa, out);
    if (synth->parsed()) return do_synth(sa, out);
    return do_validate(validate_path, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    if (train->parsed() && ta.preset.empty() && ta.query.empty()) err << train->help();
    return kInputError;
  } catch (const ComputeError& e) {
    err << "computation error: " << e.what() << "\n";
    return kComputeError;
  } catch (const std::exception& e) {
    err << "computation error: " << e.what() << "\n";
    return kComputeError;
  }
}

}  // namespace afft::cli
