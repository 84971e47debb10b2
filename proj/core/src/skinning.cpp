#include "posekit/skinning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "posekit/error.hpp"

namespace posekit {

SkinningMatrix::SkinningMatrix(Eigen::MatrixXd weights, double row_sum_tolerance)
    : weights_(std::move(weights)) {
  if (!weights_.allFinite()) throw ValidationError("skinning weights contain non-finite entries");
  if ((weights_.array() < 0.0).any()) throw ValidationError("skinning weights contain negative entries");
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    const double sum = weights_.row(i).sum();
    if (std::abs(sum - 1.0) > row_sum_tolerance) {
      throw ValidationError("skinning weights: row " + std::to_string(i) + " sums to " +
                            std::to_string(sum));
    }
  }
}

double SkinningMatrix::max_row_sum_error() const {
  if (weights_.rows() == 0) return 0.0;
  return (weights_.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

std::vector<Vec3> bone_centers(const KeypointSet& keypoints, const KinematicTree& tree) {
  std::vector<Vec3> centers(tree.bone_count());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const std::size_t j = KinematicTree::joint_of_bone(k);
    const auto p = static_cast<std::size_t>(tree.parent(j));
    centers[k] = 0.5 * (keypoints.joints.at(j) + keypoints.joints.at(p));
  }
  return centers;
}

std::vector<double> default_radii(const KeypointSet& keypoints, const KinematicTree& tree) {
  std::vector<double> radii(tree.bone_count());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    radii[k] = 0.5 * keypoints.bone_vector(tree, k).norm();
  }
  return radii;
}

GmmParams make_gmm_params(const KeypointSet& keypoints, const KinematicTree& tree,
                          double temperature) {
  keypoints.validate(tree);
  return GmmParams{bone_centers(keypoints, tree), default_radii(keypoints, tree), temperature};
}

SkinningMatrix gmm_weights(std::span<const Vec3> vertices, const GmmParams& params) {
  const std::size_t bones = params.centers.size();
  if (bones == 0) throw ValidationError("gmm_weights: no bone centers");
  if (params.radii.size() != bones) {
    throw ValidationError("gmm_weights: " + std::to_string(params.radii.size()) + " radii for " +
                          std::to_string(bones) + " centers");
  }
  if (!(params.temperature > 0.0) || !std::isfinite(params.temperature)) {
    throw ValidationError("gmm_weights: temperature must be positive");
  }
  std::vector<double> precision(bones);
  for (std::size_t k = 0; k < bones; ++k) {
    const double r = params.radii[k];
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ValidationError("gmm_weights: radius " + std::to_string(k) + " must be positive");
    }
    precision[k] = params.temperature / (r * r);
  }

  Eigen::MatrixXd w(static_cast<Eigen::Index>(vertices.size()), static_cast<Eigen::Index>(bones));
  std::vector<double> logits(bones);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < bones; ++k) {
      logits[k] = -precision[k] * (vertices[i] - params.centers[k]).squaredNorm();
      max_logit = std::max(max_logit, logits[k]);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < bones; ++k) {
      logits[k] = std::exp(logits[k] - max_logit);
      sum += logits[k];
    }
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < bones; ++k) w(row, static_cast<Eigen::Index>(k)) = logits[k] / sum;
  }
  return SkinningMatrix(std::move(w));
}

double skinning_loss(const SkinningMatrix& pred, const SkinningMatrix& pseudo) {
  if (pred.vertex_count() != pseudo.vertex_count() || pred.bone_count() != pseudo.bone_count()) {
    throw ValidationError("skinning_loss: shape mismatch");
  }
  const auto entries = static_cast<double>(pred.vertex_count() * pred.bone_count());
  if (entries == 0.0) return 0.0;
  return (pred.weights() - pseudo.weights()).squaredNorm() / entries;
}

std::vector<Vec3> lbs_vertices(std::span<const Vec3> source, const SkinningMatrix& weights,
                               std::span<const AffineTransform> transforms) {
  if (weights.vertex_count() != source.size()) {
    throw ValidationError("lbs: weights have " + std::to_string(weights.vertex_count()) +
                          " rows, source has " + std::to_string(source.size()) + " vertices");
  }
  if (weights.bone_count() != transforms.size()) {
    throw ValidationError("lbs: weights have " + std::to_string(weights.bone_count()) +
                          " columns, " + std::to_string(transforms.size()) + " bone transforms given");
  }
  // Blending the offsets (A_k - I) instead of A_k is identical for
  // row-stochastic weights and keeps identity transforms bit-exact.
  std::vector<Mat3> offsets(transforms.size());
  for (std::size_t k = 0; k < transforms.size(); ++k) {
    offsets[k] = transforms[k].linear - Mat3::Identity();
  }
  std::vector<Vec3> out(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    Mat3 linear = Mat3::Zero();
    Vec3 translation = Vec3::Zero();
    for (std::size_t k = 0; k < transforms.size(); ++k) {
      const double w = weights(i, k);
      if (w == 0.0) continue;
      linear += w * offsets[k];
      translation += w * transforms[k].translation;
    }
    out[i] = source[i] + (linear * source[i] + translation);
  }
  return out;
}

Mesh lbs_apply(const Mesh& source, const SkinningMatrix& weights, const BoneTransformSet& transforms) {
  return source.with_vertices(lbs_vertices(source.vertices(), weights, transforms.transforms));
}

}  // namespace posekit
