#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "posekit/geometry.hpp"
#include "posekit/mesh.hpp"

namespace posekit {

/// Joint hierarchy shared by the source and target skeletons.
///
/// parents[0] == -1 is the single root and parents[j] < j for every other
/// joint, so index order is a topological order. Bone k (k = 0 .. J-2)
/// connects joint k+1 to its parent; there are K = J - 1 bones.
class KinematicTree {
 public:
  /// Throws ValidationError if the ordering or root constraints fail, or
  /// if `names` is non-empty and does not have one entry per joint.
  KinematicTree(std::vector<int> parents, std::vector<std::string> names = {});

  [[nodiscard]] std::size_t joint_count() const noexcept { return parents_.size(); }
  [[nodiscard]] std::size_t bone_count() const noexcept { return parents_.size() - 1; }

  [[nodiscard]] int parent(std::size_t joint) const { return parents_.at(joint); }
  [[nodiscard]] std::span<const int> parents() const noexcept { return parents_; }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] std::span<const std::size_t> children(std::size_t joint) const {
    return children_.at(joint);
  }

  [[nodiscard]] static constexpr std::size_t joint_of_bone(std::size_t bone) noexcept {
    return bone + 1;
  }
  [[nodiscard]] static constexpr std::size_t bone_of_joint(std::size_t joint) noexcept {
    return joint - 1;
  }

  /// Simple chain 0 <- 1 <- ... <- (joints - 1).
  [[nodiscard]] static KinematicTree chain(std::size_t joints);

  friend bool operator==(const KinematicTree& a, const KinematicTree& b) {
    return a.parents_ == b.parents_;
  }

 private:
  std::vector<int> parents_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> children_;
};

/// Joint positions for one mesh.
struct KeypointSet {
  std::vector<Vec3> joints;

  /// Bone vector of bone k: joint(k+1) - joint(parent(k+1)).
  [[nodiscard]] Vec3 bone_vector(const KinematicTree& tree, std::size_t bone) const;

  /// Throws ValidationError unless the joint count matches the tree, every
  /// coordinate is finite, and every bone vector is longer than kMinVectorNorm.
  void validate(const KinematicTree& tree) const;
};

/// Row-stochastic J x N matrix mapping mesh vertices to joints.
class JointRegressor {
 public:
  /// Throws ValidationError on negative or non-finite entries, zero rows, or
  /// rows that do not sum to 1 within `row_sum_tolerance`.
  explicit JointRegressor(Eigen::MatrixXd weights, double row_sum_tolerance = 1e-6);

  [[nodiscard]] const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  [[nodiscard]] std::size_t joint_count() const noexcept {
    return static_cast<std::size_t>(weights_.rows());
  }
  [[nodiscard]] std::size_t vertex_count() const noexcept {
    return static_cast<std::size_t>(weights_.cols());
  }

 private:
  Eigen::MatrixXd weights_;
};

/// Relative twist per bone, radians in (-pi, pi].
struct TwistAngles {
  std::vector<double> phi;

  [[nodiscard]] static TwistAngles zeros(std::size_t bones) {
    return TwistAngles{std::vector<double>(bones, 0.0)};
  }
};

/// Output of scalable IK: the root orientation plus one relative rotation per bone.
struct IkSolution {
  Mat3 root_orientation = Mat3::Identity();
  std::vector<Mat3> relative;
};

/// Forward-kinematics result.
///
/// global_rotation[k] = global rotation of the parent bone * relative[k], with
/// the root orientation standing in for the parent of bones attached to the
/// root. transforms[k] maps rest space to posed space for bone k; it carries
/// both of the bone's rest endpoints onto their posed positions.
struct BoneTransformSet {
  Mat3 root_orientation = Mat3::Identity();
  std::vector<Mat3> relative;
  std::vector<Mat3> global_rotation;
  std::vector<AffineTransform> transforms;
  std::vector<Vec3> posed_joints;

  [[nodiscard]] std::size_t bone_count() const noexcept { return transforms.size(); }
};

/// joints[j] = sum_i regressor(j, i) * vertex_i.
/// Throws ValidationError if the regressor's N differs from the mesh's.
[[nodiscard]] KeypointSet regress_keypoints(const Mesh& mesh, const JointRegressor& regressor);

/// Sum over joints of |pred_j - gt_j| (Euclidean, not squared).
[[nodiscard]] double keypoint_loss(const KeypointSet& pred, const KeypointSet& gt);

/// Orientation carrying the source root frame onto the target root frame.
///
/// A root frame orthonormalizes the directions of the root's first two
/// child bones (lowest joint indices). Identity when the root has fewer than
/// two children or those two directions are parallel in either skeleton.
[[nodiscard]] Mat3 root_orientation(const KeypointSet& source, const KeypointSet& target,
                                    const KinematicTree& tree);

/// Scale-invariant inverse kinematics.
///
/// Joints are visited in index (topological) order. For bone k with parent
/// global rotation G_p, source bone vector s and target bone vector t:
///   relative[k] = swing_rotation(s, G_p^T t) * twist_rotation(s, twists[k])
/// which equals conjugating the swing from G_p s to t into the parent frame.
/// Only bone directions enter, so scaling the target changes nothing.
/// `twists.phi` may be empty (all zero) or hold exactly K angles.
[[nodiscard]] IkSolution scalable_ik(const KeypointSet& source, const KeypointSet& target,
                                     const TwistAngles& twists, const KinematicTree& tree);

/// Poses the rest skeleton. The root stays at its rest position.
[[nodiscard]] BoneTransformSet forward_kinematics(const KeypointSet& rest,
                                                  std::span<const Mat3> relative,
                                                  const KinematicTree& tree,
                                                  const Mat3& root_orientation = Mat3::Identity());

[[nodiscard]] inline BoneTransformSet forward_kinematics(const KeypointSet& rest,
                                                         const IkSolution& ik,
                                                         const KinematicTree& tree) {
  return forward_kinematics(rest, ik.relative, tree, ik.root_orientation);
}

}  // namespace posekit
