#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "posekit/error.hpp"
#include "posekit/metrics.hpp"
#include "posekit/puppet.hpp"
#include "posekit/rotation.hpp"
#include "posekit/transfer.hpp"
#include "test_support.hpp"

namespace posekit {
namespace {

using std::numbers::pi;
using testing::Rng;

constexpr double kDeg = pi / 180.0;

bool non_increasing(const std::vector<LossBreakdown>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i].total > h[i - 1].total) return false;
  }
  return true;
}

// Puppet generator -------------------------------------------------------------

TEST(Puppet, RestPoseWhenUnbent) {
  const Puppet p = make_puppet(3, 0.0, 0.0, 4);
  EXPECT_EQ(pmd(p.rest.mesh, p.posed.mesh), 0.0);
  EXPECT_TRUE(p.rest.mesh.same_connectivity(p.posed.mesh));
  EXPECT_EQ(p.tree, KinematicTree::chain(4));
  EXPECT_LE(p.generator_weights.max_row_sum_error(), 1e-12);
}

TEST(Puppet, SameSeedSameIdentity) {
  const Puppet a = make_puppet(2, 0.3, 0.1, 9);
  const Puppet b = make_puppet(2, 1.0, -0.4, 9);
  const Puppet c = make_puppet(2, 0.3, 0.1, 10);
  EXPECT_EQ(pmd(a.rest.mesh, b.rest.mesh), 0.0);
  EXPECT_GT(pmd(a.rest.mesh, c.rest.mesh), 0.0);
}

TEST(Puppet, QuarterTwistRotatesDistalCap) {
  const Puppet p = make_puppet(2, 0.0, pi / 2, 1);
  const Vec3 j1 = p.rest.keypoints.joints[1];
  const Mat3 rx = Eigen::AngleAxisd(pi / 2, Vec3::UnitX()).toRotationMatrix();
  const auto& rest = p.rest.mesh.vertices();
  const auto& posed = p.posed.mesh.vertices();
  const double tip = p.rest.keypoints.joints[2].x();
  int checked = 0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (rest[i].x() != tip) continue;
    EXPECT_LT((posed[i] - (j1 + rx * (rest[i] - j1))).norm(), 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(Puppet, KeypointsFollowBentChain) {
  const double bend = 0.7;
  const Puppet p = make_puppet(2, bend, 0.4, 5);
  const auto& rest = p.rest.keypoints.joints;
  const double l1 = rest[2].x() - rest[1].x();
  const Vec3 expected = rest[1] + l1 * Vec3(std::cos(bend), std::sin(bend), 0.0);
  EXPECT_LT((p.posed.keypoints.joints[2] - expected).norm(), 1e-14);
  EXPECT_EQ(p.posed.keypoints.joints[1], rest[1]);
}

TEST(Puppet, InvalidParameters) {
  EXPECT_THROW((void)make_puppet(0, 0.0, 0.0, 0), ValidationError);
  EXPECT_THROW((void)make_puppet(2, std::nan(""), 0.0, 0), ValidationError);
}

// Transfer ---------------------------------------------------------------------

TEST(PoseTransfer, IdentityTransferReturnsSource) {
  Rng rng(71);
  const Puppet p = make_puppet(3, 0.0, 0.0, 6);
  for (bool refinement : {false, true}) {
    TransferConfig cfg(p.tree);
    cfg.refinement.enabled = refinement;
    const TransferResult r = pose_transfer(p.rest.mesh, p.rest.keypoints, p.rest.keypoints, cfg);
    EXPECT_LE(pmd(r.refined, p.rest.mesh), 1e-12);
    EXPECT_LE(pmd(r.coarse, p.rest.mesh), 1e-12);
    EXPECT_TRUE(r.refined.same_connectivity(p.rest.mesh));
  }
}

TEST(PoseTransfer, RigidlyRotatedTargetIsIsometric) {
  // The root needs two children for its frame to pin down the rotation.
  Rng rng(73);
  const KinematicTree& tree = testing::smpl_tree();
  const KeypointSet src = testing::random_skeleton(rng, tree);
  const Mesh mesh = testing::random_closed_mesh(rng);
  const Mat3 r = rng.rotation();
  const Vec3 t = rng.vector();
  KeypointSet tgt = src;
  for (Vec3& j : tgt.joints) j = r * j + t;
  for (bool refinement : {false, true}) {
    TransferConfig cfg(tree);
    cfg.refinement.enabled = refinement;
    const TransferResult res = pose_transfer(mesh, src, tgt, cfg);
    EXPECT_LE(edge_loss(mesh, res.refined), 1e-10);
    // Root stays put, so the output is the rotated source about the root joint.
    std::vector<Vec3> expected;
    for (const Vec3& v : mesh.vertices()) expected.push_back(src.joints[0] + r * (v - src.joints[0]));
    EXPECT_LE(testing::max_vertex_distance(res.refined.vertices(), expected), 1e-9);
  }
}

TEST(PoseTransfer, RecoversPuppetTwist) {
  // Oracle: the generator poses the mesh by explicit LBS before transfer runs.
  const Puppet p = make_puppet(2, 60 * kDeg, 45 * kDeg, 7);
  TransferConfig cfg(p.tree);
  TransferInputs in;
  in.self_reference = &p.posed.mesh;
  const TransferResult r = pose_transfer(p.rest.mesh, p.rest.keypoints, p.posed.keypoints, cfg, in);
  EXPECT_NEAR(r.twists.phi[1], 45 * kDeg, 1 * kDeg);
  EXPECT_LE(pmd(r.refined, p.posed.mesh), 1e-3);
  EXPECT_TRUE(non_increasing(r.history));
  EXPECT_EQ(r.history.size(), static_cast<std::size_t>(r.iterations) + 1);
}

TEST(PoseTransfer, Deterministic) {
  const Puppet p = make_puppet(2, 40 * kDeg, 30 * kDeg, 3);
  TransferConfig cfg(p.tree);
  TransferInputs in;
  in.self_reference = &p.posed.mesh;
  const auto a = pose_transfer(p.rest.mesh, p.rest.keypoints, p.posed.keypoints, cfg, in);
  const auto b = pose_transfer(p.rest.mesh, p.rest.keypoints, p.posed.keypoints, cfg, in);
  EXPECT_EQ(a.twists.phi, b.twists.phi);
  EXPECT_EQ(testing::max_vertex_distance(a.refined.vertices(), b.refined.vertices()), 0.0);
}

TEST(PoseTransfer, RadiiOptimizationStaysPositive) {
  const Puppet p = make_puppet(2, 60 * kDeg, 45 * kDeg, 7);
  TransferConfig cfg(p.tree);
  cfg.optimize_radii = true;
  cfg.optimizer.max_iters = 50;
  TransferInputs in;
  in.self_reference = &p.posed.mesh;
  const TransferResult r = pose_transfer(p.rest.mesh, p.rest.keypoints, p.posed.keypoints, cfg, in);
  for (double radius : r.radii) EXPECT_GT(radius, 0.0);
  EXPECT_TRUE(non_increasing(r.history));
}

TEST(PoseTransfer, InputValidation) {
  const Puppet p = make_puppet(2, 0.0, 0.0, 1);
  TransferConfig cfg(p.tree);
  KeypointSet short_kp{{{0, 0, 0}, {1, 0, 0}}};
  EXPECT_THROW((void)pose_transfer(p.rest.mesh, p.rest.keypoints, short_kp, cfg), ValidationError);
  cfg.temperature = -1.0;
  EXPECT_THROW((void)pose_transfer(p.rest.mesh, p.rest.keypoints, p.rest.keypoints, cfg),
               ValidationError);
}

TEST(Refine, IsometricCoarseIsUntouched) {
  Rng rng(79);
  const Mesh m = testing::random_closed_mesh(rng);
  TransferConfig cfg(KinematicTree::chain(2));
  const Mesh out = refine(m, m, cfg);
  EXPECT_LE(testing::max_vertex_distance(out.vertices(), m.vertices()), 1e-6);
}

TEST(Refine, StretchedEdgeImproves) {
  Rng rng(83);
  const Mesh m = testing::random_closed_mesh(rng);
  std::vector<Vec3> v = m.vertices();
  const Edge e = m.edges()[3];
  v[e.b] = v[e.a] + 2.0 * (v[e.b] - v[e.a]);
  const Mesh coarse = m.with_vertices(v);
  TransferConfig cfg(KinematicTree::chain(2));
  cfg.refinement.ridge = 1e-3;
  const Mesh out = refine(coarse, m, cfg);
  EXPECT_LT(edge_loss(m, out), edge_loss(m, coarse));
}

TEST(Refine, HugeRidgeFreezesDisplacement) {
  Rng rng(89);
  const Mesh m = testing::random_closed_mesh(rng);
  std::vector<Vec3> v = m.vertices();
  for (Vec3& p : v) p *= 1.2;
  const Mesh coarse = m.with_vertices(v);
  TransferConfig cfg(KinematicTree::chain(2));
  cfg.refinement.ridge = 1e12;
  const Mesh out = refine(coarse, m, cfg);
  EXPECT_LE(testing::max_vertex_distance(out.vertices(), coarse.vertices()), 1e-9);
}

TEST(SelfReconstruct, Examples) {
  const Puppet p = make_puppet(2, 60 * kDeg, 45 * kDeg, 7);
  TransferConfig cfg(p.tree);
  const SelfResult same = self_reconstruct(p.posed, p.posed, cfg);
  EXPECT_LE(same.loss, 1e-12);
  const SelfResult r = self_reconstruct(p.rest, p.posed, cfg);
  EXPECT_LE(r.loss, 1e-3);
  EXPECT_EQ(r.loss, pmd(r.transfer.refined, p.posed.mesh));
  EXPECT_TRUE(non_increasing(r.transfer.history));
}

TEST(CycleReconstruct, TripleIdentityIsZero) {
  const Puppet p = make_puppet(2, 30 * kDeg, 10 * kDeg, 2);
  TransferConfig cfg(p.tree);
  const CycleResult c = cycle_reconstruct(p.posed, p.posed, p.posed, cfg);
  EXPECT_LE(c.loss, 1e-10);
}

TEST(CycleReconstruct, PuppetTriplet) {
  const Puppet source = make_puppet(2, 0.0, 0.0, 11);
  const Puppet target = make_puppet(2, 60 * kDeg, 45 * kDeg, 7);
  const Puppet third = make_puppet(2, 20 * kDeg, -15 * kDeg, 7);
  TransferConfig cfg(target.tree);
  CycleOptions opt;
  opt.source_canonical = &source.rest;
  opt.target_canonical = &target.rest;
  const CycleResult c = cycle_reconstruct(source.posed, target.posed, third.posed, cfg, opt);
  EXPECT_LE(c.loss, 1e-3);
  EXPECT_TRUE(non_increasing(c.forward.history));
  EXPECT_TRUE(non_increasing(c.backward.history));
}

TEST(CycleReconstruct, ConnectivityMismatch) {
  const Puppet a = make_puppet(2, 0.0, 0.0, 1);
  PuppetSpec spec;
  spec.sectors = 12;
  const Puppet b = make_puppet(spec);
  TransferConfig cfg(a.tree);
  EXPECT_THROW((void)cycle_reconstruct(a.posed, a.posed, b.posed, cfg), ValidationError);
}

}  // namespace
}  // namespace posekit
