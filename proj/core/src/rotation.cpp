#include "posekit/rotation.hpp"

#include <cmath>
#include <numbers>

#include "posekit/error.hpp"

namespace posekit {

namespace {

// Rotation taking unit vector a to unit vector b, valid whenever a.b > -1.
// No axis normalization, so it stays accurate as a x b -> 0.
Mat3 small_angle_swing(const Vec3& a, const Vec3& b) {
  const Vec3 v = a.cross(b);
  const double c = a.dot(b);
  const Mat3 k = skew(v);
  return Mat3::Identity() + k + (k * k) / (1.0 + c);
}

Mat3 half_turn(const Vec3& unit_axis) {
  const Mat3 k = skew(unit_axis);
  return Mat3::Identity() + 2.0 * (k * k);
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 fallback_axis(const Vec3& v) {
  int least = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(v[i]) < std::abs(v[least])) least = i;
  }
  return v.cross(Vec3::Unit(least)).normalized();
}

Mat3 swing_rotation(const Vec3& s, const Vec3& t) {
  const double s_norm = s.norm();
  const double t_norm = t.norm();
  if (!(s_norm > kMinVectorNorm) || !(t_norm > kMinVectorNorm)) {
    throw ValidationError("swing_rotation: near-zero input vector");
  }
  const Vec3 s_hat = s / s_norm;
  const Vec3 t_hat = t / t_norm;
  const Vec3 cross = s_hat.cross(t_hat);
  const double sin_alpha = cross.norm();
  const double cos_alpha = s_hat.dot(t_hat);

  if (sin_alpha >= kParallelThreshold) {
    // Near alpha = pi the rounded cross product leans towards s_hat by about
    // eps / sin_alpha; project that out so the axis stays exactly orthogonal.
    Vec3 axis = cross / sin_alpha;
    axis -= axis.dot(s_hat) * s_hat;
    const Mat3 k = skew(axis.normalized());
    return Mat3::Identity() + sin_alpha * k + (1.0 - cos_alpha) * (k * k);
  }
  if (cos_alpha > 0.0) return small_angle_swing(s_hat, t_hat);
  const Mat3 flip = half_turn(fallback_axis(s_hat));
  return small_angle_swing(-s_hat, t_hat) * flip;
}

Mat3 twist_rotation(const Vec3& s, double phi) {
  const double s_norm = s.norm();
  if (!(s_norm > kMinVectorNorm)) throw ValidationError("twist_rotation: near-zero axis");
  const Mat3 k = skew(s);
  return Mat3::Identity() + (std::sin(phi) / s_norm) * k +
         ((1.0 - std::cos(phi)) / (s_norm * s_norm)) * (k * k);
}

double wrap_angle(double radians) {
  constexpr double pi = std::numbers::pi;
  double wrapped = std::remainder(radians, 2.0 * pi);  // [-pi, pi]
  if (wrapped <= -pi) wrapped += 2.0 * pi;
  return wrapped;
}

double orthonormality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

bool is_rotation(const Mat3& r, double tolerance) {
  return r.allFinite() && orthonormality_error(r) <= tolerance &&
         std::abs(r.determinant() - 1.0) <= tolerance;
}

}  // namespace posekit
