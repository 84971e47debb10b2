#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace posekit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// x -> linear * x + translation
struct AffineTransform {
  Mat3 linear = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  [[nodiscard]] Vec3 operator()(const Vec3& x) const { return linear * x + translation; }

  static AffineTransform identity() { return {}; }
};

inline bool is_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace posekit
