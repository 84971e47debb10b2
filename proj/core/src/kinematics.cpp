#include "posekit/kinematics.hpp"

#include <optional>
#include <string>

#include "posekit/error.hpp"
#include "posekit/rotation.hpp"

namespace posekit {

KinematicTree::KinematicTree(std::vector<int> parents, std::vector<std::string> names)
    : parents_(std::move(parents)), names_(std::move(names)) {
  if (parents_.empty()) throw ValidationError("kinematic tree has no joints");
  if (parents_[0] != -1) throw ValidationError("kinematic tree: joint 0 must be the root (parent -1)");
  for (std::size_t j = 1; j < parents_.size(); ++j) {
    if (parents_[j] < 0 || static_cast<std::size_t>(parents_[j]) >= j) {
      throw ValidationError("kinematic tree: joint " + std::to_string(j) + " has parent " +
                            std::to_string(parents_[j]) + "; need 0 <= parent < joint");
    }
  }
  if (!names_.empty() && names_.size() != parents_.size()) {
    throw ValidationError("kinematic tree: " + std::to_string(names_.size()) + " names for " +
                          std::to_string(parents_.size()) + " joints");
  }
  children_.resize(parents_.size());
  for (std::size_t j = 1; j < parents_.size(); ++j) {
    children_[static_cast<std::size_t>(parents_[j])].push_back(j);
  }
}

KinematicTree KinematicTree::chain(std::size_t joints) {
  std::vector<int> parents(joints);
  for (std::size_t j = 0; j < joints; ++j) parents[j] = static_cast<int>(j) - 1;
  return KinematicTree(std::move(parents));
}

Vec3 KeypointSet::bone_vector(const KinematicTree& tree, std::size_t bone) const {
  const std::size_t j = KinematicTree::joint_of_bone(bone);
  return joints.at(j) - joints.at(static_cast<std::size_t>(tree.parent(j)));
}

void KeypointSet::validate(const KinematicTree& tree) const {
  if (joints.size() != tree.joint_count()) {
    throw ValidationError("keypoints: " + std::to_string(joints.size()) +
                          " joints but the tree has " + std::to_string(tree.joint_count()));
  }
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (!joints[j].allFinite()) {
      throw ValidationError("keypoints: joint " + std::to_string(j) + " is not finite");
    }
  }
  for (std::size_t k = 0; k < tree.bone_count(); ++k) {
    if (!(bone_vector(tree, k).norm() > kMinVectorNorm)) {
      throw ValidationError("keypoints: degenerate bone " + std::to_string(k) + " (joint " +
                            std::to_string(KinematicTree::joint_of_bone(k)) + ")");
    }
  }
}

JointRegressor::JointRegressor(Eigen::MatrixXd weights, double row_sum_tolerance)
    : weights_(std::move(weights)) {
  if (weights_.rows() == 0 || weights_.cols() == 0) throw ValidationError("joint regressor is empty");
  if (!weights_.allFinite()) throw ValidationError("joint regressor has non-finite entries");
  if ((weights_.array() < 0.0).any()) throw ValidationError("joint regressor has negative entries");
  for (Eigen::Index j = 0; j < weights_.rows(); ++j) {
    const double sum = weights_.row(j).sum();
    if (sum == 0.0) throw ValidationError("joint regressor: zero row " + std::to_string(j));
    if (std::abs(sum - 1.0) > row_sum_tolerance) {
      throw ValidationError("joint regressor: row " + std::to_string(j) + " sums to " +
                            std::to_string(sum));
    }
  }
}

KeypointSet regress_keypoints(const Mesh& mesh, const JointRegressor& regressor) {
  if (regressor.vertex_count() != mesh.vertex_count()) {
    throw ValidationError("regress_keypoints: regressor has " +
                          std::to_string(regressor.vertex_count()) + " columns, mesh has " +
                          std::to_string(mesh.vertex_count()) + " vertices");
  }
  const auto& w = regressor.weights();
  const auto& v = mesh.vertices();
  KeypointSet out;
  out.joints.resize(regressor.joint_count(), Vec3::Zero());
  for (std::size_t j = 0; j < out.joints.size(); ++j) {
    Vec3 acc = Vec3::Zero();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double weight = w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      if (weight != 0.0) acc += weight * v[i];
    }
    out.joints[j] = acc;
  }
  return out;
}

double keypoint_loss(const KeypointSet& pred, const KeypointSet& gt) {
  if (pred.joints.size() != gt.joints.size()) {
    throw ValidationError("keypoint_loss: joint-count mismatch");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < pred.joints.size(); ++j) sum += (pred.joints[j] - gt.joints[j]).norm();
  return sum;
}

namespace {

// Columns e1, e2, e3 from the first two child-bone directions of the root.
std::optional<Mat3> root_frame(const KeypointSet& kp, const KinematicTree& tree) {
  const auto kids = tree.children(0);
  if (kids.size() < 2) return std::nullopt;
  const Vec3 d1 = (kp.joints[kids[0]] - kp.joints[0]).normalized();
  const Vec3 d2 = (kp.joints[kids[1]] - kp.joints[0]).normalized();
  const Vec3 ortho = d2 - d2.dot(d1) * d1;
  if (!(ortho.norm() >= kParallelThreshold)) return std::nullopt;
  Mat3 frame;
  frame.col(0) = d1;
  frame.col(1) = ortho.normalized();
  frame.col(2) = frame.col(0).cross(frame.col(1));
  return frame;
}

}  // namespace

Mat3 root_orientation(const KeypointSet& source, const KeypointSet& target,
                      const KinematicTree& tree) {
  const auto src = root_frame(source, tree);
  const auto tgt = root_frame(target, tree);
  if (!src || !tgt) return Mat3::Identity();
  return *tgt * src->transpose();
}

IkSolution scalable_ik(const KeypointSet& source, const KeypointSet& target,
                       const TwistAngles& twists, const KinematicTree& tree) {
  source.validate(tree);
  target.validate(tree);
  const std::size_t bones = tree.bone_count();
  if (!twists.phi.empty() && twists.phi.size() != bones) {
    throw ValidationError("scalable_ik: " + std::to_string(twists.phi.size()) +
                          " twist angles for " + std::to_string(bones) + " bones");
  }

  IkSolution ik;
  ik.root_orientation = root_orientation(source, target, tree);
  ik.relative.resize(bones);

  // global[j]: accumulated rotation of the bone ending at joint j; the root
  // slot holds the root orientation.
  std::vector<Mat3> global(tree.joint_count());
  global[0] = ik.root_orientation;
  for (std::size_t j = 1; j < tree.joint_count(); ++j) {
    const std::size_t k = KinematicTree::bone_of_joint(j);
    const auto p = static_cast<std::size_t>(tree.parent(j));
    const Vec3 s = source.joints[j] - source.joints[p];
    const Vec3 t = target.joints[j] - target.joints[p];
    const Mat3 swing = swing_rotation(s, global[p].transpose() * t);
    const double phi = twists.phi.empty() ? 0.0 : twists.phi[k];
    ik.relative[k] = compose_relative(swing, twist_rotation(s, phi));
    global[j] = global[p] * ik.relative[k];
  }
  return ik;
}

BoneTransformSet forward_kinematics(const KeypointSet& rest, std::span<const Mat3> relative,
                                    const KinematicTree& tree, const Mat3& root_orientation) {
  if (rest.joints.size() != tree.joint_count()) {
    throw ValidationError("forward_kinematics: rest keypoints do not match the tree");
  }
  if (relative.size() != tree.bone_count()) {
    throw ValidationError("forward_kinematics: " + std::to_string(relative.size()) +
                          " rotations for " + std::to_string(tree.bone_count()) + " bones");
  }
  const std::size_t bones = tree.bone_count();
  BoneTransformSet out;
  out.root_orientation = root_orientation;
  out.relative.assign(relative.begin(), relative.end());
  out.global_rotation.resize(bones);
  out.transforms.resize(bones);
  out.posed_joints.resize(tree.joint_count());
  out.posed_joints[0] = rest.joints[0];

  std::vector<Mat3> global(tree.joint_count());
  global[0] = root_orientation;
  for (std::size_t j = 1; j < tree.joint_count(); ++j) {
    const std::size_t k = KinematicTree::bone_of_joint(j);
    const auto p = static_cast<std::size_t>(tree.parent(j));
    global[j] = global[p] * relative[k];
    out.posed_joints[j] = out.posed_joints[p] + global[j] * (rest.joints[j] - rest.joints[p]);
    out.global_rotation[k] = global[j];
    out.transforms[k].linear = global[j];
    out.transforms[k].translation = out.posed_joints[p] - global[j] * rest.joints[p];
  }
  return out;
}

}  // namespace posekit
