#include "posekit/serialization.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "posekit/error.hpp"
#include "posekit/format.hpp"
#include "posekit/obj_io.hpp"

namespace posekit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

template <typename T>
T get_as(const json& j, std::string_view what) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

Vec3 to_vec3(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string(what) + ": expected [x, y, z]");
  return {get_as<double>(j[0], what), get_as<double>(j[1], what), get_as<double>(j[2], what)};
}

ordered_json from_vec3(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

ordered_json from_mat3(const Mat3& m) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(ordered_json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

ordered_json loss_json(const LossBreakdown& l) {
  ordered_json j;
  j["keypoint"] = l.keypoint;
  j["skin"] = l.skin;
  j["cycle"] = l.cycle;
  j["self"] = l.self;
  j["edge"] = l.edge;
  j["total"] = l.total;
  return j;
}

// Splits CSV text into rows of numeric fields, skipping blank lines.
std::vector<std::vector<double>> parse_numeric_csv(std::string_view csv, std::string_view what,
                                                   std::size_t first_line = 0) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line_no <= first_line) continue;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t field_start = 0;
    while (field_start <= line.size()) {
      auto comma = line.find(',', field_start);
      if (comma == std::string_view::npos) comma = line.size();
      std::string_view field = line.substr(field_start, comma - field_start);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      double value = 0.0;
      const char* fend = field.data() + field.size();
      auto [ptr, ec] = std::from_chars(field.data(), fend, value);
      if (field.empty() || ec != std::errc{} || ptr != fend) {
        throw ValidationError(std::string(what) + ":" + std::to_string(line_no) +
                              ": bad number '" + std::string(field) + "'");
      }
      row.push_back(value);
      field_start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd dense_from_rows(const std::vector<std::vector<double>>& rows, std::string_view what) {
  if (rows.empty()) throw ValidationError(std::string(what) + ": no rows");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw ValidationError(std::string(what) + ": row " + std::to_string(r + 1) + " has " +
                            std::to_string(rows[r].size()) + " columns, expected " +
                            std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

void reject_unknown_keys(const json& section, std::initializer_list<std::string_view> known,
                         std::string_view what) {
  if (!section.is_object()) throw ValidationError("settings: '" + std::string(what) + "' must be an object");
  for (const auto& [key, value] : section.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ValidationError("settings: unknown key '" + key + "' in '" + std::string(what) + "'");
  }
}

template <typename T>
void read_optional(const json& section, const char* key, T& target, std::string_view what) {
  if (section.contains(key)) target = get_as<T>(section.at(key), std::string(what) + "." + key);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("error while writing file: " + path.string());
}

KinematicTree parse_tree(std::string_view text) {
  const json j = parse_json(text, "kinematic tree");
  if (!j.contains("parents")) throw ValidationError("kinematic tree: missing 'parents'");
  auto parents = get_as<std::vector<int>>(j.at("parents"), "kinematic tree parents");
  std::vector<std::string> names;
  if (j.contains("names")) names = get_as<std::vector<std::string>>(j.at("names"), "kinematic tree names");
  return KinematicTree(std::move(parents), std::move(names));
}

KinematicTree load_tree(const std::filesystem::path& path) { return parse_tree(read_text_file(path)); }

std::string tree_to_json(const KinematicTree& tree) {
  ordered_json j;
  j["parents"] = std::vector<int>(tree.parents().begin(), tree.parents().end());
  j["names"] = tree.names();
  return j.dump();
}

KeypointSet parse_keypoints(std::string_view text) {
  const json j = parse_json(text, "keypoints");
  if (!j.contains("joints") || !j.at("joints").is_array()) {
    throw ValidationError("keypoints: missing 'joints' array");
  }
  KeypointSet kp;
  for (const auto& p : j.at("joints")) kp.joints.push_back(to_vec3(p, "keypoints"));
  for (std::size_t i = 0; i < kp.joints.size(); ++i) {
    if (!kp.joints[i].allFinite()) throw ValidationError("keypoints: joint " + std::to_string(i) + " is not finite");
  }
  return kp;
}

KeypointSet load_keypoints(const std::filesystem::path& path) {
  return parse_keypoints(read_text_file(path));
}

std::string keypoints_to_json(const KeypointSet& keypoints) {
  ordered_json j;
  j["joints"] = ordered_json::array();
  for (const Vec3& p : keypoints.joints) j["joints"].push_back(from_vec3(p));
  return j.dump();
}

void save_keypoints(const KeypointSet& keypoints, const std::filesystem::path& path) {
  write_text_file(path, keypoints_to_json(keypoints) + "\n");
}

JointRegressor parse_regressor(std::string_view csv, std::optional<std::size_t> vertex_count) {
  std::string_view head = csv.substr(0, csv.find('\n'));
  while (!head.empty() && (head.back() == '\r' || head.back() == ' ')) head.remove_suffix(1);
  if (head == "row,col,weight") {
    const auto triplets = parse_numeric_csv(csv, "regressor", 1);
    std::size_t rows = 0;
    std::size_t cols = vertex_count.value_or(0);
    for (const auto& t : triplets) {
      if (t.size() != 3) throw ValidationError("regressor: sparse rows need row,col,weight");
      if (t[0] < 0 || t[1] < 0 || t[0] != std::floor(t[0]) || t[1] != std::floor(t[1])) {
        throw ValidationError("regressor: sparse indices must be non-negative integers");
      }
      rows = std::max(rows, static_cast<std::size_t>(t[0]) + 1);
      if (!vertex_count) cols = std::max(cols, static_cast<std::size_t>(t[1]) + 1);
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (const auto& t : triplets) {
      const auto c = static_cast<std::size_t>(t[1]);
      if (c >= cols) throw ValidationError("regressor: column index " + std::to_string(c) + " out of range");
      m(static_cast<Eigen::Index>(t[0]), static_cast<Eigen::Index>(c)) += t[2];
    }
    return JointRegressor(std::move(m));
  }
  Eigen::MatrixXd m = dense_from_rows(parse_numeric_csv(csv, "regressor"), "regressor");
  if (vertex_count && static_cast<std::size_t>(m.cols()) != *vertex_count) {
    throw ValidationError("regressor: " + std::to_string(m.cols()) + " columns, expected " +
                          std::to_string(*vertex_count));
  }
  return JointRegressor(std::move(m));
}

JointRegressor load_regressor(const std::filesystem::path& path, std::optional<std::size_t> vertex_count) {
  return parse_regressor(read_text_file(path), vertex_count);
}

SkinningMatrix parse_skinning_csv(std::string_view csv) {
  Eigen::MatrixXd m = dense_from_rows(parse_numeric_csv(csv, "skinning weights"), "skinning weights");
  if ((m.array() < 0.0).any()) throw ValidationError("skinning weights: negative entry");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double sum = m.row(i).sum();
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ValidationError("skinning weights: row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    m.row(i) /= sum;
  }
  return SkinningMatrix(std::move(m));
}

SkinningMatrix load_skinning_csv(const std::filesystem::path& path) {
  return parse_skinning_csv(read_text_file(path));
}

std::string skinning_to_csv(const SkinningMatrix& weights) {
  std::string out;
  const auto& w = weights.weights();
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
      if (k > 0) out += ',';
      out += format_double(w(i, k));
    }
    out += '\n';
  }
  return out;
}

void save_skinning_csv(const SkinningMatrix& weights, const std::filesystem::path& path) {
  write_text_file(path, skinning_to_csv(weights));
}

std::string loss_to_json_line(const LossBreakdown& losses, int iteration) {
  ordered_json j;
  j["iteration"] = iteration;
  const ordered_json parts = loss_json(losses);
  for (const auto& [key, value] : parts.items()) j[key] = value;
  return j.dump();
}

void apply_settings_json(std::string_view text, TransferConfig& config) {
  const json j = parse_json(text, "settings");
  if (!j.is_object()) throw ValidationError("settings: expected a JSON object");

  if (j.contains("preset")) {
    const auto preset = get_as<std::string>(j.at("preset"), "settings.preset");
    if (preset == "template") {
      config.loss_weights = LossWeights::template_meshes();
    } else if (preset == "scanned") {
      config.loss_weights = LossWeights::scanned_meshes();
    } else {
      throw ValidationError("settings: unknown preset '" + preset + "'");
    }
  }
  if (j.contains("loss_weights")) {
    const json& s = j.at("loss_weights");
    reject_unknown_keys(s, {"keypoint", "skin", "cycle", "self", "edge"}, "loss_weights");
    read_optional(s, "keypoint", config.loss_weights.keypoint, "loss_weights");
    read_optional(s, "skin", config.loss_weights.skin, "loss_weights");
    read_optional(s, "cycle", config.loss_weights.cycle, "loss_weights");
    read_optional(s, "self", config.loss_weights.self, "loss_weights");
    read_optional(s, "edge", config.loss_weights.edge, "loss_weights");
  }
  if (j.contains("skinning")) {
    const json& s = j.at("skinning");
    reject_unknown_keys(s, {"temperature", "optimize_radii"}, "skinning");
    read_optional(s, "temperature", config.temperature, "skinning");
    read_optional(s, "optimize_radii", config.optimize_radii, "skinning");
  }
  if (j.contains("optimizer")) {
    const json& s = j.at("optimizer");
    reject_unknown_keys(s, {"max_iters", "step_size", "tolerance", "seed"}, "optimizer");
    read_optional(s, "max_iters", config.optimizer.max_iters, "optimizer");
    read_optional(s, "step_size", config.optimizer.step_size, "optimizer");
    read_optional(s, "tolerance", config.optimizer.tolerance, "optimizer");
    read_optional(s, "seed", config.optimizer.seed, "optimizer");
  }
  if (j.contains("refinement")) {
    const json& s = j.at("refinement");
    reject_unknown_keys(s, {"enabled", "ridge", "max_iters"}, "refinement");
    read_optional(s, "enabled", config.refinement.enabled, "refinement");
    read_optional(s, "ridge", config.refinement.ridge, "refinement");
    read_optional(s, "max_iters", config.refinement.max_iters, "refinement");
  }
  if (j.contains("cycle_keypoints")) {
    const auto mode = get_as<std::string>(j.at("cycle_keypoints"), "settings.cycle_keypoints");
    if (mode == "posed_joints") {
      config.intermediate_keypoints = IntermediateKeypoints::PosedJoints;
    } else if (mode == "regressed") {
      config.intermediate_keypoints = IntermediateKeypoints::Regressed;
    } else {
      throw ValidationError("settings: unknown cycle_keypoints '" + mode + "'");
    }
  }
  config.validate();
}

std::string transfer_result_to_json(const TransferResult& result, std::uint64_t seed) {
  ordered_json j;
  j["seed"] = seed;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["twists"] = result.twists.phi;
  j["radii"] = result.radii;
  j["root_orientation"] = from_mat3(result.transforms.root_orientation);
  j["relative_rotations"] = ordered_json::array();
  for (const Mat3& r : result.transforms.relative) j["relative_rotations"].push_back(from_mat3(r));
  j["posed_joints"] = ordered_json::array();
  for (const Vec3& p : result.transforms.posed_joints) j["posed_joints"].push_back(from_vec3(p));
  j["initial_losses"] = result.history.empty() ? ordered_json(nullptr) : loss_json(result.history.front());
  j["optimized_losses"] = result.history.empty() ? ordered_json(nullptr) : loss_json(result.history.back());
  j["final_losses"] = loss_json(result.final_losses);
  return j.dump(2);
}

void save_transfer_result(const TransferResult& result, const std::filesystem::path& directory,
                          std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create output directory " + directory.string() + ": " + ec.message());
  save_mesh(result.coarse, directory / "coarse.obj");
  save_mesh(result.refined, directory / "refined.obj");
  save_skinning_csv(result.weights, directory / "weights.csv");
  std::string lines;
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    lines += loss_to_json_line(result.history[i], static_cast<int>(i));
    lines += '\n';
  }
  write_text_file(directory / "losses.jsonl", lines);
  write_text_file(directory / "result.json", transfer_result_to_json(result, seed) + "\n");
}

namespace {

RunManifest parse_manifest_json(const json& j, const std::filesystem::path& base_dir) {
  RunManifest m;
  if (!j.contains("identities") || !j.at("identities").is_array()) {
    throw ValidationError("manifest: missing 'identities' array");
  }
  std::map<std::string, std::size_t> index;
  const auto resolve = [&base_dir](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  for (const auto& ident : j.at("identities")) {
    RunManifest::Identity id;
    id.name = get_as<std::string>(ident.at("name"), "manifest identity name");
    if (!ident.contains("poses") || !ident.at("poses").is_array() || ident.at("poses").empty()) {
      throw ValidationError("manifest: identity '" + id.name + "' needs a non-empty 'poses' array");
    }
    for (const auto& pose : ident.at("poses")) {
      if (!pose.contains("mesh") || !pose.contains("keypoints")) {
        throw ValidationError("manifest: every pose of '" + id.name + "' needs 'mesh' and 'keypoints'");
      }
      id.poses.push_back({resolve(get_as<std::string>(pose.at("mesh"), "manifest mesh")),
                          resolve(get_as<std::string>(pose.at("keypoints"), "manifest keypoints"))});
    }
    if (!index.emplace(id.name, m.identities.size()).second) {
      throw ValidationError("manifest: duplicate identity '" + id.name + "'");
    }
    m.identities.push_back(std::move(id));
  }
  const auto pose_ref = [&](const json& r) {
    const auto name = get_as<std::string>(r.at("identity"), "manifest pair identity");
    const auto it = index.find(name);
    if (it == index.end()) throw ValidationError("manifest: unknown identity '" + name + "'");
    RunManifest::PoseRef ref{it->second, r.contains("pose") ? get_as<std::size_t>(r.at("pose"), "manifest pose") : 0};
    if (ref.pose >= m.identities[ref.identity].poses.size()) {
      throw ValidationError("manifest: identity '" + name + "' has no pose " + std::to_string(ref.pose));
    }
    return ref;
  };
  if (j.contains("pairs")) {
    for (const auto& pair : j.at("pairs")) {
      if (!pair.contains("source") || !pair.contains("target")) {
        throw ValidationError("manifest: every pair needs 'source' and 'target'");
      }
      m.pairs.push_back({pose_ref(pair.at("source")), pose_ref(pair.at("target"))});
    }
  }
  return m;
}

}  // namespace

RunManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  const json j = parse_json(text, "manifest");
  try {
    return parse_manifest_json(j, base_dir);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

RunManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

}  // namespace posekit
