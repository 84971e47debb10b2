#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "posekit/kinematics.hpp"
#include "posekit/objectives.hpp"
#include "posekit/skinning.hpp"
#include "posekit/transfer.hpp"

namespace posekit {

// File formats:
//   kinematic tree   JSON {"parents": [-1, 0, ...], "names": ["pelvis", ...]}
//   keypoints        JSON {"joints": [[x, y, z], ...]}
//   joint regressor  dense CSV (J rows x N columns), or sparse triplets under a
//                    "row,col,weight" header line
//   skinning weights dense CSV (N rows x K columns)
//   run settings     JSON, see apply_settings_json
//   run manifest     JSON, see RunManifest
// Readers throw IoError for unreadable files and ValidationError for bad content.

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

[[nodiscard]] KinematicTree parse_tree(std::string_view json);
[[nodiscard]] KinematicTree load_tree(const std::filesystem::path& path);
[[nodiscard]] std::string tree_to_json(const KinematicTree& tree);

[[nodiscard]] KeypointSet parse_keypoints(std::string_view json);
[[nodiscard]] KeypointSet load_keypoints(const std::filesystem::path& path);
[[nodiscard]] std::string keypoints_to_json(const KeypointSet& keypoints);
void save_keypoints(const KeypointSet& keypoints, const std::filesystem::path& path);

/// `vertex_count`, when given, fixes N for sparse files and is checked for dense ones.
[[nodiscard]] JointRegressor parse_regressor(std::string_view csv,
                                             std::optional<std::size_t> vertex_count = std::nullopt);
[[nodiscard]] JointRegressor load_regressor(const std::filesystem::path& path,
                                            std::optional<std::size_t> vertex_count = std::nullopt);

/// Rows must sum to 1 within 1e-6 (text files from other tools carry
/// rounding); they are renormalized on load.
[[nodiscard]] SkinningMatrix parse_skinning_csv(std::string_view csv);
[[nodiscard]] SkinningMatrix load_skinning_csv(const std::filesystem::path& path);
[[nodiscard]] std::string skinning_to_csv(const SkinningMatrix& weights);
void save_skinning_csv(const SkinningMatrix& weights, const std::filesystem::path& path);

/// {"iteration": i, "keypoint": .., "skin": .., "cycle": .., "self": .., "edge": .., "total": ..}
[[nodiscard]] std::string loss_to_json_line(const LossBreakdown& losses, int iteration);

/// Applies the optional sections of a settings object to `config`:
///   "preset": "template" | "scanned"          (loss-weight defaults)
///   "loss_weights": {"keypoint", "skin", "cycle", "self", "edge"}
///   "skinning": {"temperature", "optimize_radii"}
///   "optimizer": {"max_iters", "step_size", "tolerance", "seed"}
///   "refinement": {"enabled", "ridge", "max_iters"}
///   "cycle_keypoints": "posed_joints" | "regressed"
/// Other top-level keys are left for the caller. Unknown keys inside a
/// section are rejected.
void apply_settings_json(std::string_view json, TransferConfig& config);

/// Writes coarse.obj, refined.obj, weights.csv, losses.jsonl and result.json
/// into `directory` (created if needed).
void save_transfer_result(const TransferResult& result, const std::filesystem::path& directory,
                          std::uint64_t seed);

/// twists, radii, root orientation, relative rotations, posed joints,
/// final losses and optimizer status as one JSON object.
[[nodiscard]] std::string transfer_result_to_json(const TransferResult& result, std::uint64_t seed);

/// Identities with their poses (first listed pose is the canonical one) and
/// the source/target pairs to transfer:
///   {"identities": [{"name": "a", "poses": [{"mesh": "a0.obj", "keypoints": "a0.json"}, ...]}, ...],
///    "pairs": [{"source": {"identity": "a", "pose": 1}, "target": {"identity": "b", "pose": 0}}, ...]}
/// Relative paths resolve against the manifest's directory.
struct RunManifest {
  struct Pose {
    std::filesystem::path mesh;
    std::filesystem::path keypoints;
  };
  struct Identity {
    std::string name;
    std::vector<Pose> poses;
  };
  struct PoseRef {
    std::size_t identity = 0;
    std::size_t pose = 0;
  };
  struct Pair {
    PoseRef source;
    PoseRef target;
  };
  std::vector<Identity> identities;
  std::vector<Pair> pairs;
};

[[nodiscard]] RunManifest parse_manifest(std::string_view json, const std::filesystem::path& base_dir);
[[nodiscard]] RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace posekit
