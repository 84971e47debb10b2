#include "posekit/puppet.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "posekit/error.hpp"

namespace posekit {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Mat3 rot_x(double a) {
  Mat3 r;
  r << 1, 0, 0,
       0, std::cos(a), -std::sin(a),
       0, std::sin(a), std::cos(a);
  return r;
}

Mat3 rot_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0,
       std::sin(a), std::cos(a), 0,
       0, 0, 1;
  return r;
}

// Bone weights for a point at axial coordinate x along the chain.
std::vector<double> blend_weights(double x, const std::vector<double>& joint_x,
                                  const std::vector<double>& band) {
  const std::size_t bones = joint_x.size() - 1;
  std::vector<double> w(bones, 0.0);
  std::size_t seg = 0;
  while (seg + 1 < bones && x > joint_x[seg + 1]) ++seg;
  w[seg] = 1.0;
  // Interior joints sit between bone j-1 (proximal) and bone j (distal).
  for (std::size_t j = 1; j < bones; ++j) {
    const double h = band[j];
    const double d = x - joint_x[j];
    if (std::abs(d) < h) {
      std::fill(w.begin(), w.end(), 0.0);
      const double distal = (d + h) / (2.0 * h);
      w[j] = distal;
      w[j - 1] = 1.0 - distal;
      break;
    }
  }
  return w;
}

}  // namespace

Puppet make_puppet(const PuppetSpec& spec) {
  if (spec.segments < 1) throw ValidationError("make_puppet: segments must be >= 1");
  if (spec.rings_per_segment < 1) throw ValidationError("make_puppet: rings_per_segment must be >= 1");
  if (spec.sectors < 3) throw ValidationError("make_puppet: sectors must be >= 3");
  if (!std::isfinite(spec.bend) || !std::isfinite(spec.twist)) {
    throw ValidationError("make_puppet: bend and twist must be finite");
  }

  const auto bones = static_cast<std::size_t>(spec.segments);
  std::mt19937_64 rng(spec.seed);
  const double radius = 0.2 * (0.85 + 0.3 * unit_uniform(rng));
  std::vector<double> lengths(bones);
  for (double& l : lengths) l = 0.85 + 0.3 * unit_uniform(rng);

  std::vector<double> joint_x(bones + 1, 0.0);
  for (std::size_t b = 0; b < bones; ++b) joint_x[b + 1] = joint_x[b] + lengths[b];
  std::vector<double> band(bones, 0.0);
  for (std::size_t j = 1; j < bones; ++j) band[j] = 0.2 * std::min(lengths[j - 1], lengths[j]);

  // Rest surface: rings of `sectors` vertices plus one cap center at each end.
  std::vector<double> ring_x;
  for (std::size_t b = 0; b < bones; ++b) {
    for (int r = 0; r < spec.rings_per_segment; ++r) {
      ring_x.push_back(joint_x[b] + lengths[b] * r / spec.rings_per_segment);
    }
  }
  ring_x.push_back(joint_x[bones]);

  const auto sectors = static_cast<VertexIndex>(spec.sectors);
  std::vector<Vec3> vertices;
  std::vector<double> axial;
  for (double x : ring_x) {
    for (VertexIndex s = 0; s < sectors; ++s) {
      const double theta = 2.0 * std::numbers::pi * s / sectors;
      vertices.emplace_back(x, radius * std::cos(theta), radius * std::sin(theta));
      axial.push_back(x);
    }
  }
  const auto proximal_cap = static_cast<VertexIndex>(vertices.size());
  vertices.emplace_back(0.0, 0.0, 0.0);
  axial.push_back(0.0);
  const auto distal_cap = static_cast<VertexIndex>(vertices.size());
  vertices.emplace_back(joint_x[bones], 0.0, 0.0);
  axial.push_back(joint_x[bones]);

  std::vector<Face> faces;
  const auto rings = static_cast<VertexIndex>(ring_x.size());
  for (VertexIndex r = 0; r + 1 < rings; ++r) {
    for (VertexIndex s = 0; s < sectors; ++s) {
      const VertexIndex a = r * sectors + s;
      const VertexIndex b = r * sectors + (s + 1) % sectors;
      const VertexIndex c = (r + 1) * sectors + s;
      const VertexIndex d = (r + 1) * sectors + (s + 1) % sectors;
      faces.push_back({a, b, d});
      faces.push_back({a, d, c});
    }
  }
  const VertexIndex last = (rings - 1) * sectors;
  for (VertexIndex s = 0; s < sectors; ++s) {
    faces.push_back({proximal_cap, (s + 1) % sectors, s});
    faces.push_back({distal_cap, last + s, last + (s + 1) % sectors});
  }

  // Generator skinning weights.
  Eigen::MatrixXd w(static_cast<Eigen::Index>(vertices.size()), static_cast<Eigen::Index>(bones));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto row = blend_weights(axial[i], joint_x, band);
    for (std::size_t b = 0; b < bones; ++b) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = row[b];
    }
  }

  // Chain forward kinematics: only the distal bone carries a rotation.
  // Joint and vertex motion is accumulated as offsets from the rest pose so
  // that bones with identity rotation reproduce their rest positions exactly.
  std::vector<Mat3> relative(bones, Mat3::Identity());
  relative[bones - 1] = rot_z(spec.bend) * rot_x(spec.twist);
  std::vector<Mat3> global(bones);
  std::vector<Vec3> rest_joints(bones + 1);
  std::vector<Vec3> joint_offset(bones + 1, Vec3::Zero());
  for (std::size_t j = 0; j <= bones; ++j) rest_joints[j] = Vec3(joint_x[j], 0.0, 0.0);
  for (std::size_t b = 0; b < bones; ++b) {
    global[b] = b == 0 ? relative[0] : Mat3(global[b - 1] * relative[b]);
    joint_offset[b + 1] =
        joint_offset[b] + (global[b] - Mat3::Identity()) * (rest_joints[b + 1] - rest_joints[b]);
  }
  std::vector<Vec3> posed_joints(bones + 1);
  for (std::size_t j = 0; j <= bones; ++j) posed_joints[j] = rest_joints[j] + joint_offset[j];

  std::vector<Vec3> posed(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    Vec3 offset = Vec3::Zero();
    for (std::size_t b = 0; b < bones; ++b) {
      const double wb = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
      if (wb == 0.0) continue;
      offset += wb * ((global[b] - Mat3::Identity()) * (vertices[i] - rest_joints[b]) + joint_offset[b]);
    }
    posed[i] = vertices[i] + offset;
  }

  Mesh rest_mesh(std::move(vertices), std::move(faces));
  Mesh posed_mesh = rest_mesh.with_vertices(std::move(posed));
  return Puppet{
      KinematicTree::chain(bones + 1),
      PosedMesh{std::move(rest_mesh), KeypointSet{std::move(rest_joints)}},
      PosedMesh{std::move(posed_mesh), KeypointSet{std::move(posed_joints)}},
      SkinningMatrix(std::move(w)),
      radius,
  };
}

}  // namespace posekit
