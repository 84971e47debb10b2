#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "posekit/geometry.hpp"
#include "posekit/kinematics.hpp"
#include "posekit/mesh.hpp"

namespace posekit::testing {

// Seeded generators ----------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Vec3 unit_vector() {
    for (;;) {
      const Vec3 v(normal(), normal(), normal());
      const double n = v.norm();
      if (n > 1e-6) return v / n;
    }
  }
  /// Random direction scaled into [lo, hi].
  Vec3 vector(double lo = 0.1, double hi = 10.0) { return unit_vector() * uniform(lo, hi); }

  Mat3 rotation() {
    return Eigen::AngleAxisd(uniform(-M_PI, M_PI), unit_vector()).toRotationMatrix();
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Unit vector perpendicular to `v`, chosen at random.
inline Vec3 random_perpendicular(Rng& rng, const Vec3& v) {
  const Vec3 u = v.normalized();
  for (;;) {
    const Vec3 w = rng.unit_vector();
    const Vec3 p = w - w.dot(u) * u;
    if (p.norm() > 1e-3) return p.normalized();
  }
}

/// Skeleton with random bone directions and lengths in [0.2, 1.5] (or `length` if > 0).
inline KeypointSet random_skeleton(Rng& rng, const KinematicTree& tree, double length = 0.0) {
  KeypointSet kp;
  kp.joints.resize(tree.joint_count());
  kp.joints[0] = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  for (std::size_t j = 1; j < tree.joint_count(); ++j) {
    const double len = length > 0.0 ? length : rng.uniform(0.2, 1.5);
    kp.joints[j] = kp.joints[static_cast<std::size_t>(tree.parent(j))] + len * rng.unit_vector();
  }
  return kp;
}

/// Same bone directions as `shape_of` but every bone length taken from `lengths_of`.
inline KeypointSet with_bone_lengths(const KeypointSet& shape_of, const KeypointSet& lengths_of,
                                     const KinematicTree& tree) {
  KeypointSet out;
  out.joints.resize(tree.joint_count());
  out.joints[0] = shape_of.joints[0];
  for (std::size_t j = 1; j < tree.joint_count(); ++j) {
    const std::size_t p = static_cast<std::size_t>(tree.parent(j));
    const double len = (lengths_of.joints[j] - lengths_of.joints[p]).norm();
    out.joints[j] = out.joints[p] + len * (shape_of.joints[j] - shape_of.joints[p]).normalized();
  }
  return out;
}

/// Vertices scattered around a skeleton's bones.
inline std::vector<Vec3> points_near_skeleton(Rng& rng, const KeypointSet& kp,
                                              const KinematicTree& tree, int per_bone) {
  std::vector<Vec3> pts;
  for (std::size_t j = 1; j < tree.joint_count(); ++j) {
    const Vec3& a = kp.joints[static_cast<std::size_t>(tree.parent(j))];
    const Vec3& b = kp.joints[j];
    for (int i = 0; i < per_bone; ++i) {
      pts.push_back(a + rng.uniform(0.05, 0.95) * (b - a) + 0.05 * rng.unit_vector());
    }
  }
  return pts;
}

/// Closed triangulated surface: a UV sphere with random radial noise.
inline Mesh random_closed_mesh(Rng& rng, int rings = 6, int sectors = 10, double noise = 0.1) {
  std::vector<Vec3> v;
  std::vector<Face> f;
  v.emplace_back(0, 0, 1);
  for (int r = 1; r < rings; ++r) {
    const double theta = M_PI * r / rings;
    for (int s = 0; s < sectors; ++s) {
      const double phi = 2.0 * M_PI * s / sectors;
      const double rad = 1.0 + noise * rng.uniform(-1, 1);
      v.emplace_back(rad * std::sin(theta) * std::cos(phi), rad * std::sin(theta) * std::sin(phi),
                     rad * std::cos(theta));
    }
  }
  v.emplace_back(0, 0, -1);
  const auto idx = [&](int r, int s) {
    return static_cast<VertexIndex>(1 + (r - 1) * sectors + (s % sectors));
  };
  for (int s = 0; s < sectors; ++s) f.push_back({0, idx(1, s), idx(1, s + 1)});
  for (int r = 1; r + 1 < rings; ++r) {
    for (int s = 0; s < sectors; ++s) {
      f.push_back({idx(r, s), idx(r + 1, s), idx(r + 1, s + 1)});
      f.push_back({idx(r, s), idx(r + 1, s + 1), idx(r, s + 1)});
    }
  }
  const auto bottom = static_cast<VertexIndex>(v.size() - 1);
  for (int s = 0; s < sectors; ++s) f.push_back({bottom, idx(rings - 1, s + 1), idx(rings - 1, s)});
  return Mesh(std::move(v), std::move(f));
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double max_vertex_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
  return m;
}

// Independent oracles ---------------------------------------------------------

/// Swing via Eigen's axis-angle, no shared code with the library.
inline Mat3 axis_angle_swing_oracle(const Vec3& s, const Vec3& t) {
  const Vec3 a = s.normalized();
  const Vec3 b = t.normalized();
  const Vec3 axis = a.cross(b);
  const double angle = std::atan2(axis.norm(), a.dot(b));
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Brute-force chamfer with explicit double loops.
inline double chamfer_oracle(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  const auto one_way = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double sum = 0.0;
    for (const Vec3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) {
        const double dx = p.x() - q.x(), dy = p.y() - q.y(), dz = p.z() - q.z();
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return 0.5 * one_way(a, b) + 0.5 * one_way(b, a);
}

/// Hand-derived gradient of mean_e (L0_e - L_e)^2 for a list of edges:
///   d/dx_a = (2/E) (L_e - L0_e) (x_a - x_b) / L_e,  d/dx_b = -d/dx_a.
inline std::vector<Vec3> edge_gradient_oracle(const std::vector<std::pair<int, int>>& edges,
                                              const std::vector<Vec3>& rest,
                                              const std::vector<Vec3>& deformed) {
  std::vector<Vec3> g(deformed.size(), Vec3::Zero());
  const double e_count = static_cast<double>(edges.size());
  for (const auto& [a, b] : edges) {
    const Vec3 d = deformed[a] - deformed[b];
    const double len = d.norm();
    const double len0 = (rest[a] - rest[b]).norm();
    g[a] += 2.0 / e_count * (len - len0) * d / len;
    g[b] -= 2.0 / e_count * (len - len0) * d / len;
  }
  return g;
}

/// Chain FK written out directly: G_j = G_{j-1} R_j, p_{j+1} = p_j + G_j (r_{j+1} - r_j).
inline std::vector<Vec3> chain_fk_oracle(const std::vector<Vec3>& rest, const std::vector<Mat3>& rel) {
  std::vector<Vec3> posed(rest.size());
  posed[0] = rest[0];
  Mat3 g = Mat3::Identity();
  for (std::size_t k = 0; k < rel.size(); ++k) {
    g = g * rel[k];
    posed[k + 1] = posed[k] + g * (rest[k + 1] - rest[k]);
  }
  return posed;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("posekit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline const KinematicTree& smpl_tree() {
  static const KinematicTree tree({-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8,
                                   9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21});
  return tree;
}

}  // namespace posekit::testing
