#pragma once

#include "posekit/geometry.hpp"

namespace posekit {

/// Input vectors at or below this norm are rejected as degenerate.
inline constexpr double kMinVectorNorm = 1e-9;

/// |s x t| / (|s| |t|) below this counts as (anti)parallel for swing_rotation.
inline constexpr double kParallelThreshold = 1e-8;

/// [v]x, so that skew(v) * w == v.cross(w).
[[nodiscard]] Mat3 skew(const Vec3& v);

/// Swing rotation carrying the direction of `s` onto the direction of `t`.
///
/// The axis is n = (s x t) / |s x t| and the angle alpha satisfies
/// cos(alpha) = s.t / (|s| |t|); the matrix is I + sin(alpha)[n]x + (1 - cos(alpha))[n]x^2.
/// Only the directions matter, so the result is unchanged when either input
/// is scaled by a positive factor.
///
/// When s and t are nearly parallel the axis normalization is ill-conditioned;
/// the equivalent form I + [v]x + [v]x^2 / (1 + c) with v = s_hat x t_hat and
/// c = s_hat.t_hat is used instead. Nearly antiparallel inputs first take a
/// half turn about a deterministic axis perpendicular to s (s crossed with
/// the least aligned canonical basis vector, lowest index on ties).
///
/// Throws ValidationError if |s| or |t| <= kMinVectorNorm.
[[nodiscard]] Mat3 swing_rotation(const Vec3& s, const Vec3& t);

/// Rotation by `phi` radians about the axis s / |s| (right-handed). Leaves s fixed.
/// Throws ValidationError if |s| <= kMinVectorNorm.
[[nodiscard]] Mat3 twist_rotation(const Vec3& s, double phi);

/// Relative bone rotation, swing applied after twist: R = swing * twist.
[[nodiscard]] inline Mat3 compose_relative(const Mat3& swing, const Mat3& twist) {
  return swing * twist;
}

/// Unit vector perpendicular to `v`, used as the half-turn axis for antiparallel swings.
[[nodiscard]] Vec3 fallback_axis(const Vec3& v);

/// Maps an angle to (-pi, pi].
[[nodiscard]] double wrap_angle(double radians);

/// max |R^T R - I| over entries.
[[nodiscard]] double orthonormality_error(const Mat3& r);

/// True when R^T R = I and det R = +1, both within `tolerance`.
[[nodiscard]] bool is_rotation(const Mat3& r, double tolerance = 1e-9);

}  // namespace posekit
