#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "posekit/kinematics.hpp"
#include "posekit/mesh.hpp"

namespace posekit {

/// N x K non-negative weights binding vertices to bones; rows sum to 1.
class SkinningMatrix {
 public:
  SkinningMatrix() = default;

  /// Throws ValidationError on negative or non-finite entries or on rows
  /// whose sum differs from 1 by more than `row_sum_tolerance`.
  explicit SkinningMatrix(Eigen::MatrixXd weights, double row_sum_tolerance = 1e-9);

  [[nodiscard]] const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  [[nodiscard]] std::size_t vertex_count() const noexcept {
    return static_cast<std::size_t>(weights_.rows());
  }
  [[nodiscard]] std::size_t bone_count() const noexcept {
    return static_cast<std::size_t>(weights_.cols());
  }
  [[nodiscard]] double operator()(std::size_t vertex, std::size_t bone) const {
    return weights_(static_cast<Eigen::Index>(vertex), static_cast<Eigen::Index>(bone));
  }

  /// Largest |row sum - 1|.
  [[nodiscard]] double max_row_sum_error() const;

 private:
  Eigen::MatrixXd weights_;
};

/// Isotropic Gaussian mixture over bone centers; Q_k = I / radius_k^2.
struct GmmParams {
  std::vector<Vec3> centers;
  std::vector<double> radii;
  double temperature = 2.0;
};

inline constexpr double kDefaultTemperature = 2.0;

/// Midpoint of each bone's two endpoint joints.
[[nodiscard]] std::vector<Vec3> bone_centers(const KeypointSet& keypoints, const KinematicTree& tree);

/// Half the length of each bone.
[[nodiscard]] std::vector<double> default_radii(const KeypointSet& keypoints,
                                                const KinematicTree& tree);

/// Centers at bone midpoints, radii at half bone length.
[[nodiscard]] GmmParams make_gmm_params(const KeypointSet& keypoints, const KinematicTree& tree,
                                        double temperature = kDefaultTemperature);

/// Pseudo skinning weights: per vertex, a softmax over bones of the logits
/// -T * |v - C_k|^2 / r_k^2. Throws ValidationError for non-positive radii or
/// temperature, or mismatched centers/radii.
[[nodiscard]] SkinningMatrix gmm_weights(std::span<const Vec3> vertices, const GmmParams& params);

/// (1/NK) * sum_ik (pred_ik - pseudo_ik)^2. Throws ValidationError on shape mismatch.
[[nodiscard]] double skinning_loss(const SkinningMatrix& pred, const SkinningMatrix& pseudo);

/// Linear blend skinning: v_i' = (sum_k w_ik A_k)(v_i), blending the full affine maps.
[[nodiscard]] std::vector<Vec3> lbs_vertices(std::span<const Vec3> source, const SkinningMatrix& weights,
                                             std::span<const AffineTransform> transforms);

/// Mesh-level LBS; the result carries the source connectivity.
/// Throws ValidationError if N or K disagree.
[[nodiscard]] Mesh lbs_apply(const Mesh& source, const SkinningMatrix& weights,
                             const BoneTransformSet& transforms);

}  // namespace posekit
