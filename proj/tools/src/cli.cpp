#include "posekit_cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "posekit/posekit.hpp"

namespace posekit::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Paths and settings gathered from --config plus command-line overrides.
struct RunConfig {
  std::optional<fs::path> tree;
  std::optional<fs::path> regressor;
  std::optional<fs::path> output_dir;
  std::string settings = "{}";
};

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " not found: " + path.string());
}

RunConfig load_run_config(const fs::path& path) {
  require_file(path, "config file");
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config " + path.string() + ": expected a JSON object");
  RunConfig cfg;
  const fs::path base = path.parent_path();
  const auto path_key = [&](const char* key) -> std::optional<fs::path> {
    if (!j.contains(key)) return std::nullopt;
    if (!j.at(key).is_string()) throw ValidationError("config: '" + std::string(key) + "' must be a path string");
    const fs::path p(j.at(key).get<std::string>());
    return p.is_absolute() ? p : base / p;
  };
  cfg.tree = path_key("tree");
  cfg.regressor = path_key("regressor");
  cfg.output_dir = path_key("output_dir");
  cfg.settings = text;
  return cfg;
}

// Fails early if `dir` cannot be created or written to.
void require_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("output directory not writable: " + dir.string());
  const fs::path probe = dir / ".posekit_write_probe";
  write_text_file(probe, "");
  fs::remove(probe, ec);
}

std::uint64_t seed_override(std::uint64_t configured) {
  const char* env = std::getenv("POSEKIT_SEED");
  if (!env || !*env) return configured;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("POSEKIT_SEED is not an unsigned integer: ") + env);
  }
}

ordered_json losses_json(const LossBreakdown& l) {
  return {{"keypoint", l.keypoint}, {"skin", l.skin},   {"cycle", l.cycle},
          {"self", l.self},         {"edge", l.edge},   {"total", l.total}};
}

ordered_json summary_json(const TransferResult& r, const fs::path& dir, std::uint64_t seed) {
  ordered_json j;
  j["output_dir"] = dir.string();
  j["seed"] = seed;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["twists"] = r.twists.phi;
  j["final_losses"] = losses_json(r.final_losses);
  return j;
}

// transfer ---------------------------------------------------------------------

struct TransferArgs {
  std::string source, source_kp, target, target_kp, regressor, config, tree, out;
  std::string canonical, canonical_kp, self_reference, manifest;
  int jobs = 1;
};

int cmd_transfer(const TransferArgs& a, std::ostream& out) {
  RunConfig rc;
  if (!a.config.empty()) rc = load_run_config(a.config);
  if (!a.tree.empty()) rc.tree = a.tree;
  if (!a.regressor.empty()) rc.regressor = a.regressor;
  if (!a.out.empty()) rc.output_dir = a.out;
  if (!rc.tree) throw ValidationError("transfer: no kinematic tree (use --tree or a config 'tree' entry)");
  require_file(*rc.tree, "tree file");
  const fs::path out_dir = rc.output_dir.value_or("out");

  TransferConfig config(load_tree(*rc.tree));
  apply_settings_json(rc.settings, config);
  const std::uint64_t seed = seed_override(config.optimizer.seed);
  config.optimizer.seed = seed;

  if (!a.manifest.empty()) {
    const RunManifest manifest = load_manifest(a.manifest);
    for (const auto& id : manifest.identities) {
      for (const auto& pose : id.poses) {
        require_file(pose.mesh, "mesh file");
        require_file(pose.keypoints, "keypoint file");
      }
    }
    require_writable_dir(out_dir);

    const std::size_t pairs = manifest.pairs.size();
    std::vector<std::optional<TransferResult>> results(pairs);
    std::vector<std::exception_ptr> errors(pairs);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t i = next++; i < pairs; i = next++) {
        try {
          const auto& pair = manifest.pairs[i];
          const auto& src_id = manifest.identities[pair.source.identity];
          const auto& tgt_id = manifest.identities[pair.target.identity];
          const auto& src_pose = src_id.poses[pair.source.pose];
          const auto& tgt_pose = tgt_id.poses[pair.target.pose];
          const Mesh source = load_mesh(src_pose.mesh);
          const KeypointSet source_kp = load_keypoints(src_pose.keypoints);
          const KeypointSet target_kp = load_keypoints(tgt_pose.keypoints);
          const PosedMesh canonical{load_mesh(src_id.poses.front().mesh),
                                    load_keypoints(src_id.poses.front().keypoints)};
          TransferInputs inputs;
          inputs.canonical = &canonical;
          // A same-identity target doubles as the self-reconstruction reference.
          std::optional<Mesh> self_ref;
          if (pair.source.identity == pair.target.identity) {
            self_ref = load_mesh(tgt_pose.mesh);
            inputs.self_reference = &*self_ref;
          }
          results[i] = pose_transfer(source, source_kp, target_kp, config, inputs);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const int jobs = std::clamp(a.jobs, 1, static_cast<int>(std::max<std::size_t>(pairs, 1)));
    std::vector<std::thread> threads;
    for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    for (std::size_t i = 0; i < pairs; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      const fs::path dir = out_dir / ("pair_" + std::to_string(i));
      save_transfer_result(*results[i], dir, seed);
      ordered_json summary = summary_json(*results[i], dir, seed);
      summary["pair"] = i;
      out << summary.dump() << '\n';
    }
    return kSuccess;
  }

  if (a.source.empty() || a.source_kp.empty()) {
    throw ValidationError("transfer: --source and --source-kp are required (or use --manifest)");
  }
  if (a.target_kp.empty() == a.target.empty()) {
    throw ValidationError("transfer: give exactly one of --target-kp or --target (with --regressor)");
  }
  require_file(a.source, "source mesh");
  require_file(a.source_kp, "keypoint file");
  if (!a.target_kp.empty()) require_file(a.target_kp, "keypoint file");
  if (!a.target.empty()) {
    require_file(a.target, "target mesh");
    if (!rc.regressor) throw ValidationError("transfer: --target needs --regressor");
  }
  if (rc.regressor) require_file(*rc.regressor, "regressor file");
  if (!a.canonical.empty() || !a.canonical_kp.empty()) {
    if (a.canonical.empty() || a.canonical_kp.empty()) {
      throw ValidationError("transfer: --canonical and --canonical-kp go together");
    }
    require_file(a.canonical, "canonical mesh");
    require_file(a.canonical_kp, "keypoint file");
  }
  if (!a.self_reference.empty()) require_file(a.self_reference, "self-reference mesh");
  require_writable_dir(out_dir);

  const Mesh source = load_mesh(a.source);
  const KeypointSet source_kp = load_keypoints(a.source_kp);
  std::optional<JointRegressor> regressor;
  KeypointSet target_kp;
  if (!a.target.empty()) {
    const Mesh target = load_mesh(a.target);
    regressor = load_regressor(*rc.regressor, target.vertex_count());
    target_kp = regress_keypoints(target, *regressor);
  } else {
    target_kp = load_keypoints(a.target_kp);
    if (rc.regressor) regressor = load_regressor(*rc.regressor);
  }

  TransferInputs inputs;
  std::optional<PosedMesh> canonical;
  if (!a.canonical.empty()) {
    canonical = PosedMesh{load_mesh(a.canonical), load_keypoints(a.canonical_kp)};
    inputs.canonical = &*canonical;
  }
  std::optional<Mesh> self_ref;
  if (!a.self_reference.empty()) {
    self_ref = load_mesh(a.self_reference);
    inputs.self_reference = &*self_ref;
  }
  // The keypoint diagnostic needs a regressor defined on the source's vertices.
  if (regressor && regressor->vertex_count() == source.vertex_count()) inputs.regressor = &*regressor;

  const TransferResult result = pose_transfer(source, source_kp, target_kp, config, inputs);
  save_transfer_result(result, out_dir, seed);
  out << summary_json(result, out_dir, seed).dump() << '\n';
  return kSuccess;
}

// eval -------------------------------------------------------------------------

int cmd_eval(const std::string& a_path, const std::string& b_path, bool require_pmd, std::ostream& out,
             std::ostream& err) {
  require_file(a_path, "mesh file");
  require_file(b_path, "mesh file");
  const Mesh a = load_mesh(a_path);
  const Mesh b = load_mesh(b_path);
  if (require_pmd && a.vertex_count() != b.vertex_count()) {
    err << "eval: pmd needs equal vertex counts (" << a.vertex_count() << " vs " << b.vertex_count()
        << ")\n";
    return kFailure;
  }
  MetricReport report = evaluate(a, b);
  if (!require_pmd) report.pmd.reset();
  out << to_json(report, true) << '\n';
  return kSuccess;
}

// weights ----------------------------------------------------------------------

int cmd_weights(const std::string& mesh_path, const std::string& kp_path, const std::string& tree_path,
                double temperature, const std::string& out_path, const std::string& compare,
                std::ostream& out) {
  require_file(mesh_path, "mesh file");
  require_file(kp_path, "keypoint file");
  require_file(tree_path, "tree file");
  if (!compare.empty()) require_file(compare, "ground-truth weights");
  const KinematicTree tree = load_tree(tree_path);
  const Mesh mesh = load_mesh(mesh_path);
  const KeypointSet kp = load_keypoints(kp_path);
  kp.validate(tree);
  const SkinningMatrix w = gmm_weights(mesh.vertices(), make_gmm_params(kp, tree, temperature));
  if (!out_path.empty()) save_skinning_csv(w, out_path);
  ordered_json j;
  j["vertices"] = w.vertex_count();
  j["bones"] = w.bone_count();
  j["temperature"] = temperature;
  if (!out_path.empty()) j["output"] = out_path;
  if (!compare.empty()) j["skinning_loss"] = skinning_loss(w, load_skinning_csv(compare));
  out << j.dump() << '\n';
  return kSuccess;
}

// ik-check ---------------------------------------------------------------------

// Largest |G_k s_hat_k - t_hat_k| over bones, using the global rotations from FK.
double max_direction_error(const KeypointSet& src, const KeypointSet& tgt, const KinematicTree& tree) {
  const BoneTransformSet fk = forward_kinematics(src, scalable_ik(src, tgt, TwistAngles{}, tree), tree);
  double worst = 0.0;
  for (std::size_t k = 0; k < tree.bone_count(); ++k) {
    const Vec3 posed = fk.global_rotation[k] * src.bone_vector(tree, k).normalized();
    worst = std::max(worst, (posed - tgt.bone_vector(tree, k).normalized()).norm());
  }
  return worst;
}

int cmd_ik_check(const std::string& src_path, const std::string& tgt_path, const std::string& tree_path,
                 std::ostream& out) {
  require_file(src_path, "keypoint file");
  require_file(tgt_path, "keypoint file");
  require_file(tree_path, "tree file");
  const KinematicTree tree = load_tree(tree_path);
  const KeypointSet src = load_keypoints(src_path);
  const KeypointSet tgt = load_keypoints(tgt_path);
  src.validate(tree);
  tgt.validate(tree);

  const IkSolution base = scalable_ik(src, tgt, TwistAngles{}, tree);
  const std::vector<double> scales{0.5, 2.0, 10.0};
  double delta = 0.0;
  for (double c : scales) {
    KeypointSet scaled = tgt;
    for (Vec3& j : scaled.joints) j = tgt.joints[0] + c * (j - tgt.joints[0]);
    const IkSolution sol = scalable_ik(src, scaled, TwistAngles{}, tree);
    delta = std::max(delta, (sol.root_orientation - base.root_orientation).cwiseAbs().maxCoeff());
    for (std::size_t k = 0; k < tree.bone_count(); ++k) {
      delta = std::max(delta, (sol.relative[k] - base.relative[k]).cwiseAbs().maxCoeff());
    }
  }
  ordered_json j;
  j["bones"] = tree.bone_count();
  j["max_direction_error"] = max_direction_error(src, tgt, tree);
  j["scales"] = scales;
  j["scale_invariance_delta"] = delta;
  out << j.dump() << '\n';
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"posekit: skeleton-driven pose transfer between triangle meshes", "posekit"};
  app.require_subcommand(1);

  TransferArgs t;
  auto* transfer = app.add_subcommand("transfer", "Transfer a target pose onto a source mesh");
  transfer->add_option("--source", t.source, "Source mesh (OBJ)");
  transfer->add_option("--source-kp", t.source_kp, "Source keypoints (JSON)");
  transfer->add_option("--target-kp", t.target_kp, "Target keypoints (JSON)");
  transfer->add_option("--target", t.target, "Target mesh (OBJ); keypoints are regressed with --regressor");
  transfer->add_option("--regressor", t.regressor, "Joint regressor (CSV)");
  transfer->add_option("--config", t.config, "Run configuration (JSON)");
  transfer->add_option("--tree", t.tree, "Kinematic tree (JSON); overrides the config entry");
  transfer->add_option("--out", t.out, "Output directory (default ./out)");
  transfer->add_option("--canonical", t.canonical, "Canonical-pose mesh of the source identity (OBJ)");
  transfer->add_option("--canonical-kp", t.canonical_kp, "Canonical-pose keypoints (JSON)");
  transfer->add_option("--self-reference", t.self_reference, "Source identity in the target pose (OBJ)");
  transfer->add_option("--manifest", t.manifest, "Run manifest (JSON) listing identities and pairs");
  transfer->add_option("--jobs", t.jobs, "Pairs to run concurrently in manifest mode")->check(CLI::PositiveNumber);

  std::string eval_a, eval_b;
  bool eval_pmd = false;
  auto* eval = app.add_subcommand("eval", "Compare two meshes");
  eval->add_option("a", eval_a, "First mesh (OBJ)")->required();
  eval->add_option("b", eval_b, "Second mesh (OBJ)")->required();
  eval->add_flag("--pmd", eval_pmd, "Require vertex correspondence and report PMD");

  std::string w_mesh, w_kp, w_tree, w_out, w_compare;
  double w_temperature = kDefaultTemperature;
  auto* weights = app.add_subcommand("weights", "Export Gaussian-mixture pseudo skinning weights");
  weights->add_option("--mesh", w_mesh, "Mesh in its canonical pose (OBJ)")->required();
  weights->add_option("--kp", w_kp, "Keypoints of that pose (JSON)")->required();
  weights->add_option("--tree", w_tree, "Kinematic tree (JSON)")->required();
  weights->add_option("--temperature", w_temperature, "Softmax temperature")->check(CLI::PositiveNumber);
  weights->add_option("--out", w_out, "Output CSV (N rows x K columns)");
  weights->add_option("--compare", w_compare, "Ground-truth weights CSV to score against");

  std::string ik_src, ik_tgt, ik_tree;
  auto* ik = app.add_subcommand("ik-check", "IK/FK round trip and scale-invariance diagnostic");
  ik->add_option("--source-kp", ik_src, "Source keypoints (JSON)")->required();
  ik->add_option("--target-kp", ik_tgt, "Target keypoints (JSON)")->required();
  ik->add_option("--tree", ik_tree, "Kinematic tree (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kFailure;
  }

  try {
    if (*transfer) return cmd_transfer(t, out);
    if (*eval) return cmd_eval(eval_a, eval_b, eval_pmd, out, err);
    if (*weights) return cmd_weights(w_mesh, w_kp, w_tree, w_temperature, w_out, w_compare, out);
    if (*ik) return cmd_ik_check(ik_src, ik_tgt, ik_tree, out);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace posekit::cli
