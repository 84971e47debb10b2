#pragma once

#include <cstdint>
#include <vector>

#include "posekit/kinematics.hpp"
#include "posekit/mesh.hpp"
#include "posekit/objectives.hpp"
#include "posekit/skinning.hpp"

namespace posekit {

/// A mesh together with its keypoints.
struct PosedMesh {
  Mesh mesh;
  KeypointSet keypoints;
};

struct OptimizerSettings {
  int max_iters = 200;
  double step_size = 1.0;
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
};

struct RefinementSettings {
  bool enabled = false;
  double ridge = 1.0;
  int max_iters = 200;
};

/// How the second transfer of a cycle obtains keypoints for the intermediate mesh.
enum class IntermediateKeypoints {
  PosedJoints,  ///< forward-kinematics joints of the first transfer
  Regressed,    ///< regress the first transfer's output with the source identity's regressor
};

struct TransferConfig {
  explicit TransferConfig(KinematicTree kinematic_tree) : tree(std::move(kinematic_tree)) {}

  KinematicTree tree;
  LossWeights loss_weights;
  double temperature = kDefaultTemperature;
  /// Also fit per-bone Gaussian radii (as log-radii) next to the twists.
  bool optimize_radii = false;
  OptimizerSettings optimizer;
  RefinementSettings refinement;
  IntermediateKeypoints intermediate_keypoints = IntermediateKeypoints::PosedJoints;

  /// Throws ValidationError on out-of-range settings.
  void validate() const;
};

/// Optional, non-owning extras for pose_transfer.
struct TransferInputs {
  /// Canonical pose of the source identity; pseudo skinning weights are
  /// computed here. Defaults to the source itself.
  const PosedMesh* canonical = nullptr;
  /// Same-identity mesh in the target pose: enables the self term.
  const Mesh* self_reference = nullptr;
  /// Mesh to reconstruct in a cycle: enables the cycle term.
  const Mesh* cycle_reference = nullptr;
  /// When set, the keypoint term compares the regressed source keypoints
  /// against the provided ones (diagnostic; constant during optimization).
  const JointRegressor* regressor = nullptr;
};

struct TransferResult {
  Mesh coarse;
  Mesh refined;
  BoneTransformSet transforms;
  TwistAngles twists;
  std::vector<double> radii;
  SkinningMatrix weights;
  /// Loss terms at the start point and after every accepted optimizer step.
  std::vector<LossBreakdown> history;
  /// Loss terms evaluated on the refined mesh.
  LossBreakdown final_losses;
  int iterations = 0;
  bool converged = false;
};

/// Transfers the pose described by `target_kp` onto `source`.
///
/// Bone rotations come from scalable IK (source -> target keypoints, current
/// twists) and forward kinematics on the source skeleton. Pseudo skinning
/// weights come from the Gaussian mixture on the canonical pose, and the
/// coarse mesh from LBS. The twists, and the radii when enabled, are fitted
/// by gradient descent to the weighted loss. When enabled, refinement
/// then runs on the coarse mesh.
///
/// Throws ValidationError on inconsistent inputs and DivergenceError if the
/// objective becomes non-finite.
[[nodiscard]] TransferResult pose_transfer(const Mesh& source, const KeypointSet& source_kp,
                                           const KeypointSet& target_kp,
                                           const TransferConfig& config,
                                           const TransferInputs& inputs = {});

/// Residual correction: returns coarse + dV, where dV minimizes
///   edge_loss(source, coarse + dV) + ridge * (1/N) * sum_i |dv_i|^2
/// starting from dV = 0 (so the objective never ends above its value at 0).
[[nodiscard]] Mesh refine(const Mesh& coarse, const Mesh& source, const TransferConfig& config);

struct CycleOptions {
  const PosedMesh* source_canonical = nullptr;
  const PosedMesh* target_canonical = nullptr;
  /// Required when config.intermediate_keypoints == Regressed; maps the
  /// source identity's vertices to joints.
  const JointRegressor* source_regressor = nullptr;
};

struct CycleResult {
  double loss = 0.0;
  TransferResult forward;
  TransferResult backward;
  KeypointSet intermediate_keypoints;
};

/// Transfers target's pose onto source, then transfers that result's pose
/// onto `third` (same identity as target), and scores the reconstruction
/// against target by PMD. Throws ValidationError if third and target do not
/// share connectivity.
[[nodiscard]] CycleResult cycle_reconstruct(const PosedMesh& source, const PosedMesh& target,
                                            const PosedMesh& third, const TransferConfig& config,
                                            const CycleOptions& options = {});

struct SelfResult {
  double loss = 0.0;
  TransferResult transfer;
};

/// pmd(pose_transfer(source -> target), target) for two poses of one identity.
/// Throws ValidationError if the meshes do not share connectivity.
[[nodiscard]] SelfResult self_reconstruct(const PosedMesh& source, const PosedMesh& target,
                                          const TransferConfig& config,
                                          const PosedMesh* canonical = nullptr);

}  // namespace posekit
