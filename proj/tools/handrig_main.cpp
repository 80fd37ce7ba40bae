// handrig: build a rigid hand model, project poses onto it, benchmark projections.
//
//   handrig build-model --skeleton S.json [--mesh M.obj --weights W.txt] --out DIR
//   handrig project     --model DIR --poses P.json --method bch --out angles.csv
//   handrig evaluate    --model DIR (--poses P.json | --sample KIND --n N --seed S) --out metrics.csv
//
// Exit codes: 0 success, 1 computation failure, 2 input or usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "handrig/handrig.hpp"
#include "handrig/io/csv.hpp"
#include "handrig/io/json_io.hpp"
#include "handrig/io/mesh_io.hpp"

namespace fs = std::filesystem;
using handrig::io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCompute = 1;
constexpr int kExitInput = 2;

/// Raised for usage problems detected after CLI parsing (missing paths etc).
struct UsageError : handrig::SchemaError {
  using handrig::SchemaError::SchemaError;
};

struct ProjectionFlags {
  int bch_iterations = 3;
  double relaxation = 0.5;
  double lsq_grid_step = 1e-3;
  double lsq_refine_tol = 1e-6;
};

struct RunOptions {
  std::string config;
  // build-model
  std::string skeleton, mesh, weights, limits, abduction_axis = "y";
  double thumb_tilt = handrig::kThumbTilt;
  // shared
  std::string out;
  std::string model_dir, poses;
  // project
  std::string method = "bch";
  bool mano_order = false;
  bool no_clamp = false;
  // evaluate
  std::vector<std::string> methods = {"bch", "naive", "lsq"};
  std::string sample;
  std::size_t sample_n = 100;
  std::uint64_t seed = 42;
  double max_angle_deg = 60.0;
  std::string per_joint_csv;
  int threads = 1;
  bool no_timing = false;
  ProjectionFlags projection;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " path is required");
  if (!fs::is_regular_file(path)) throw handrig::io::IoError(std::string(what) + " \"" + path + "\" does not exist");
}

void require_parent_dir(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " path is required");
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw handrig::io::IoError(std::string(what) + " directory \"" + parent.string() + "\" does not exist");
  }
}

/// Writes to `path` through a temporary sibling so failures leave no partial file.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path) : path_(std::move(path)), tmp_(path_ + ".tmp"), out_(tmp_, std::ios::binary) {
    if (!out_) throw handrig::io::IoError("cannot write \"" + tmp_ + "\"");
  }
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  std::ostream& stream() { return out_; }
  void commit() {
    out_.close();
    if (!out_) throw handrig::io::IoError("write to \"" + tmp_ + "\" failed");
    fs::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_, tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

handrig::ProjectionConfig projection_config(const RunOptions& o) {
  handrig::ProjectionConfig cfg{o.projection.bch_iterations, o.projection.relaxation, o.projection.lsq_grid_step,
                                o.projection.lsq_refine_tol};
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Run config file: flat JSON object, unknown keys rejected. Values only fill
// options that were not given on the command line.
// ---------------------------------------------------------------------------

template <typename T>
void fill(const Json& doc, const char* key, CLI::App& app, const char* flag, T& target) {
  if (!doc.contains(key)) return;
  const CLI::Option* opt = app.get_option_no_throw(flag);
  if (opt != nullptr && opt->count() > 0) return;
  try {
    target = doc[key].get<T>();
  } catch (const Json::exception&) {
    throw handrig::SchemaError(std::string("config: \"") + key + "\" has the wrong type");
  }
}

void apply_config(const std::string& path, CLI::App& app, RunOptions& o) {
  const Json doc = handrig::io::parse_json(handrig::io::read_text_file(path), path);
  handrig::io::reject_unknown_keys(
      doc, {"skeleton", "mesh", "weights", "limits", "abduction_axis", "thumb_tilt", "out", "model", "poses", "method",
            "methods", "mano_order", "sample", "n", "seed", "max_angle_deg", "per_joint_csv", "threads", "projection"},
      "config");
  fill(doc, "skeleton", app, "--skeleton", o.skeleton);
  fill(doc, "mesh", app, "--mesh", o.mesh);
  fill(doc, "weights", app, "--weights", o.weights);
  fill(doc, "limits", app, "--limits", o.limits);
  fill(doc, "abduction_axis", app, "--abduction-axis", o.abduction_axis);
  fill(doc, "thumb_tilt", app, "--thumb-tilt", o.thumb_tilt);
  fill(doc, "out", app, "--out", o.out);
  fill(doc, "model", app, "--model", o.model_dir);
  fill(doc, "poses", app, "--poses", o.poses);
  fill(doc, "method", app, "--method", o.method);
  fill(doc, "methods", app, "--methods", o.methods);
  fill(doc, "mano_order", app, "--mano-order", o.mano_order);
  fill(doc, "sample", app, "--sample", o.sample);
  fill(doc, "n", app, "--n", o.sample_n);
  fill(doc, "seed", app, "--seed", o.seed);
  fill(doc, "max_angle_deg", app, "--max-angle-deg", o.max_angle_deg);
  fill(doc, "per_joint_csv", app, "--per-joint-csv", o.per_joint_csv);
  fill(doc, "threads", app, "--threads", o.threads);
  if (doc.contains("projection")) {
    const Json& p = doc["projection"];
    handrig::io::reject_unknown_keys(p, {"bch_iterations", "relaxation", "lsq_grid_step", "lsq_refine_tol"},
                                     "config.projection");
    fill(p, "bch_iterations", app, "--bch-iterations", o.projection.bch_iterations);
    fill(p, "relaxation", app, "--relaxation", o.projection.relaxation);
    fill(p, "lsq_grid_step", app, "--lsq-grid-step", o.projection.lsq_grid_step);
    fill(p, "lsq_refine_tol", app, "--lsq-refine-tol", o.projection.lsq_refine_tol);
  }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_build_model(const RunOptions& o) {
  require_file(o.skeleton, "skeleton");
  if (!o.limits.empty()) require_file(o.limits, "limits");
  if (o.mesh.empty() != o.weights.empty()) {
    if (o.weights.empty()) {
      std::cerr << "warning: --mesh given without --weights; links get primitive box visuals\n";
    } else {
      throw UsageError("--weights requires --mesh");
    }
  }
  const bool with_mesh = !o.mesh.empty() && !o.weights.empty();
  if (with_mesh) {
    require_file(o.mesh, "mesh");
    require_file(o.weights, "weights");
  }
  if (o.out.empty()) throw UsageError("--out directory is required");

  handrig::ModelConfig cfg;
  if (!o.limits.empty()) {
    cfg.limits = handrig::io::limits_config_from_json(
        handrig::io::parse_json(handrig::io::read_text_file(o.limits), o.limits));
  }
  if (o.abduction_axis == "y") {
    cfg.abduction_axis = handrig::AbductionAxis::y;
  } else if (o.abduction_axis == "x") {
    cfg.abduction_axis = handrig::AbductionAxis::x;
  } else {
    throw UsageError("--abduction-axis must be x or y");
  }
  cfg.thumb_tilt = o.thumb_tilt;

  const handrig::HandSkeleton skel = handrig::io::load_skeleton(o.skeleton);
  std::optional<handrig::SkinnedMesh> mesh;
  if (with_mesh) mesh = handrig::io::load_skinned_mesh(o.mesh, o.weights);

  const handrig::HandModel model = handrig::build_hand_model(skel, cfg);

  fs::create_directories(o.out);
  handrig::io::write_text_file((fs::path(o.out) / "model.json").string(), handrig::io::model_to_json(model).dump(2) + "\n");

  std::optional<handrig::Segmentation> seg;
  if (mesh) {
    seg = handrig::segment_mesh(*mesh, model);
    for (const auto& w : seg->warnings) std::cerr << "warning: " << w << "\n";
    const fs::path mesh_dir = fs::path(o.out) / "meshes";
    fs::create_directories(mesh_dir);
    for (const auto& s : seg->segments) {
      handrig::io::write_text_file((mesh_dir / (s.link + ".obj")).string(),
                                   handrig::io::obj_to_string(s.vertices, s.faces, "link " + s.link + ", link frame"));
    }
  } else {
    std::cerr << "warning: no mesh/weights given; URDF uses primitive box visuals\n";
  }

  const handrig::UrdfDocument doc = handrig::export_urdf(model, seg ? &*seg : nullptr);
  handrig::io::write_text_file((fs::path(o.out) / "hand.urdf").string(), doc.xml);

  std::cout << "model: " << model.link_count() << " links, " << model.dof_count() << " DOFs ("
            << model.two_dof_count() << " two-DOF joints, " << model.one_dof_count() << " one-DOF joints)\n"
            << "urdf: " << doc.links << " link elements, " << doc.revolute_joints << " revolute joints\n";
  if (seg) {
    std::size_t owned = 0;
    for (const auto& s : seg->segments) owned += s.source_indices.size();
    std::cout << "segments: " << seg->segments.size() << " (" << owned << " vertices assigned)\n";
  }
  std::cout << "wrote " << o.out << "\n";
  return kExitOk;
}

handrig::HandModel load_model_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--model directory is required");
  const fs::path p = fs::path(dir) / "model.json";
  if (!fs::is_regular_file(p)) throw handrig::io::IoError("model \"" + p.string() + "\" does not exist");
  return handrig::io::load_model(p.string());
}

int cmd_project(const RunOptions& o) {
  const handrig::ProjectionConfig cfg = projection_config(o);
  const handrig::MethodChoice method = handrig::method_from_string(o.method);
  require_file(o.poses, "poses");
  require_parent_dir(o.out, "--out");
  const handrig::HandModel model = load_model_dir(o.model_dir);

  AtomicFile out(o.out);
  handrig::io::write_angles_header(out.stream(), model);
  std::size_t clamps = 0;
  const std::size_t frames = handrig::io::stream_poses_file(o.poses, [&](std::size_t i, const handrig::PoseFrame& f) {
    const handrig::PoseFrame pose = o.mano_order ? handrig::from_mano_order(f) : f;
    const handrig::ProjectedPose p = handrig::project_pose(model, pose, method, cfg, !o.no_clamp);
    clamps += static_cast<std::size_t>(p.clamp_count);
    handrig::io::write_angles_row(out.stream(), i, p);
  });
  out.commit();
  std::cout << "projected " << frames << " frames with " << handrig::to_string(method) << ", " << clamps
            << " clamped angles\n";
  return kExitOk;
}

int cmd_evaluate(const RunOptions& o) {
  const handrig::ProjectionConfig cfg = projection_config(o);
  std::vector<handrig::MethodChoice> methods;
  for (const auto& m : o.methods) methods.push_back(handrig::method_from_string(m));
  if (methods.empty()) throw UsageError("--methods must name at least one method");
  if (o.poses.empty() == o.sample.empty()) throw UsageError("give exactly one of --poses or --sample");
  if (!o.poses.empty()) require_file(o.poses, "poses");
  require_parent_dir(o.out, "--out");
  if (!o.per_joint_csv.empty()) require_parent_dir(o.per_joint_csv, "--per-joint-csv");
  if (o.threads < 1) throw UsageError("--threads must be >= 1");
  const handrig::HandModel model = load_model_dir(o.model_dir);

  std::vector<handrig::PoseFrame> poses;
  if (!o.poses.empty()) {
    poses = handrig::io::load_poses(o.poses);
    if (o.mano_order) {
      for (auto& p : poses) p = handrig::from_mano_order(p);
    }
    if (poses.empty()) throw handrig::SchemaError("pose file has no frames");
  } else {
    if (o.sample_n == 0) throw UsageError("--n must be positive");
    poses = handrig::sample_poses(model, handrig::sample_kind_from_string(o.sample), o.sample_n,
                                  handrig::deg_to_rad(o.max_angle_deg), o.seed);
  }

  handrig::EvaluationOptions opts;
  opts.threads = o.threads;
  const handrig::MetricsReport report = handrig::evaluate_roundtrip(model, poses, methods, cfg, o.seed, opts);

  handrig::io::print_summary(std::cout, report);
  AtomicFile out(o.out);
  handrig::io::write_metrics_csv(out.stream(), report, !o.no_timing);
  out.commit();
  if (!o.per_joint_csv.empty()) {
    AtomicFile pj(o.per_joint_csv);
    handrig::io::write_per_joint_csv(pj.stream(), report);
    pj.commit();
  }
  return kExitOk;
}

Json describe(const CLI::App& app) {
  Json options = Json::array();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_name().empty()) continue;
    options.push_back({{"name", opt->get_name()},
                       {"description", opt->get_description()},
                       {"required", opt->get_required()},
                       {"takes_value", opt->get_expected_max() > 0},
                       {"default", opt->get_default_str()}});
  }
  Json j{{"name", app.get_name()}, {"description", app.get_description()}, {"options", options}};
  Json subs = Json::array();
  for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) subs.push_back(describe(*sub));
  if (!subs.empty()) j["subcommands"] = subs;
  return j;
}

void add_projection_flags(CLI::App* sub, RunOptions& o) {
  sub->add_option("--bch-iterations", o.projection.bch_iterations, "BCH fixed iteration count")->capture_default_str();
  sub->add_option("--relaxation", o.projection.relaxation, "BCH update relaxation in (0, 1]")->capture_default_str();
  sub->add_option("--lsq-grid-step", o.projection.lsq_grid_step, "least-squares grid spacing, rad")->capture_default_str();
  sub->add_option("--lsq-refine-tol", o.projection.lsq_refine_tol, "least-squares refinement tolerance, rad")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid hand model builder, pose projector and projection benchmark", "handrig"};
  app.set_version_flag("--version", std::string("handrig ") + handrig::kVersion);
  app.require_subcommand(0, 1);
  bool help_json = false;
  app.add_flag("--help-json", help_json, "print a machine-readable description of all commands and exit");

  RunOptions o;
  auto* build = app.add_subcommand("build-model", "build model.json, segment meshes and hand.urdf from a skeleton");
  build->add_option("--skeleton", o.skeleton, "skeleton JSON (21 keypoints, meters)");
  build->add_option("--mesh", o.mesh, "rest mesh OBJ");
  build->add_option("--weights", o.weights, "skinning weights, 16 columns per vertex");
  build->add_option("--out", o.out, "output directory");
  build->add_option("--limits", o.limits, "joint limits JSON");
  build->add_option("--abduction-axis", o.abduction_axis, "finger triad member used for abduction (y or x)")
      ->capture_default_str();
  build->add_option("--thumb-tilt", o.thumb_tilt, "thumb MCP/IP axis tilt, rad")->capture_default_str();
  build->add_option("--config", o.config, "run config JSON");

  auto* project = app.add_subcommand("project", "project a pose sequence to 20 joint angles (CSV)");
  project->add_option("--model", o.model_dir, "directory containing model.json");
  project->add_option("--poses", o.poses, "pose sequence JSON");
  project->add_option("--method", o.method, "bch, naive or lsq")->capture_default_str();
  project->add_option("--out", o.out, "output angles CSV");
  project->add_flag("--mano-order", o.mano_order, "input joints follow MANO order (index, middle, pinky, ring, thumb)");
  project->add_flag("--no-clamp", o.no_clamp, "do not clamp angles to joint limits");
  project->add_option("--config", o.config, "run config JSON");
  add_projection_flags(project, o);

  auto* evaluate = app.add_subcommand("evaluate", "round-trip accuracy and timing benchmark");
  evaluate->add_option("--model", o.model_dir, "directory containing model.json");
  evaluate->add_option("--poses", o.poses, "pose sequence JSON");
  evaluate->add_option("--sample", o.sample, "sample poses: on_manifold, off_manifold or adversarial");
  evaluate->add_option("--n", o.sample_n, "number of sampled poses")->capture_default_str();
  evaluate->add_option("--seed", o.seed, "sampling seed")->capture_default_str();
  evaluate->add_option("--max-angle-deg", o.max_angle_deg, "perturbation / adversarial angle bound, degrees")
      ->capture_default_str();
  evaluate->add_option("--methods", o.methods, "methods to evaluate")->delimiter(',')->capture_default_str();
  evaluate->add_option("--out", o.out, "metrics CSV");
  evaluate->add_option("--per-joint-csv", o.per_joint_csv, "optional per-joint metrics CSV");
  evaluate->add_option("--threads", o.threads, "pose-level worker threads")->capture_default_str();
  evaluate->add_flag("--mano-order", o.mano_order, "input joints follow MANO order");
  evaluate->add_flag("--no-timing", o.no_timing, "leave the time column empty (byte-stable output)");
  evaluate->add_option("--config", o.config, "run config JSON");
  add_projection_flags(evaluate, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  if (help_json) {
    std::cout << describe(app).dump(2) << "\n";
    return kExitOk;
  }

  try {
    CLI::App* active = nullptr;
    for (CLI::App* sub : {build, project, evaluate}) {
      if (sub->parsed()) active = sub;
    }
    if (active == nullptr) {
      std::cerr << app.help();
      return kExitInput;
    }
    if (!o.config.empty()) {
      require_file(o.config, "config");
      apply_config(o.config, *active, o);
    }
    if (active == build) return cmd_build_model(o);
    if (active == project) return cmd_project(o);
    return cmd_evaluate(o);
  } catch (const handrig::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const handrig::io::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const handrig::InvalidWeights& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const handrig::ModelMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
}
