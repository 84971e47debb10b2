#pragma once

#include <cstdint>

#include "posekit/kinematics.hpp"
#include "posekit/skinning.hpp"
#include "posekit/transfer.hpp"

namespace posekit {

/// Shape and pose of a synthetic capped-cylinder "puppet".
///
/// The cylinder lies along +x with its root joint at the origin and is split
/// into `segments` bones forming a chain. The seed picks the identity
/// (segment lengths and radius); the same seed always gives the same rest mesh.
/// The pose rotates only the distal bone about its proximal joint:
/// relative rotation = Rz(bend) * Rx(twist), i.e. a twist about the rest bone
/// axis followed by a bend in the xy-plane.
struct PuppetSpec {
  int segments = 2;
  double bend = 0.0;
  double twist = 0.0;
  std::uint64_t seed = 0;
  int rings_per_segment = 8;
  int sectors = 16;
};

struct Puppet {
  KinematicTree tree;
  PosedMesh rest;
  PosedMesh posed;
  /// Rigid inside each segment, linearly blended across a band around each
  /// interior joint.
  SkinningMatrix generator_weights;
  double radius = 0.0;
};

/// Rest and exactly LBS-posed puppet sharing connectivity.
/// Throws ValidationError for segments < 1, rings_per_segment < 1,
/// sectors < 3, or non-finite angles.
[[nodiscard]] Puppet make_puppet(const PuppetSpec& spec);

[[nodiscard]] inline Puppet make_puppet(int segments, double bend, double twist, std::uint64_t seed) {
  PuppetSpec spec;
  spec.segments = segments;
  spec.bend = bend;
  spec.twist = twist;
  spec.seed = seed;
  return make_puppet(spec);
}

}  // namespace posekit
