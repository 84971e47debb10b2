#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "posekit/error.hpp"
#include "posekit/metrics.hpp"
#include "posekit/mesh.hpp"
#include "posekit/obj_io.hpp"
#include "test_support.hpp"

namespace posekit {
namespace {

using testing::Rng;

Mesh unit_triangle() {
  return Mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
}

std::string expect_validation_message(const std::string& obj) {
  std::istringstream in(obj);
  try {
    (void)read_obj(in, "test.obj");
  } catch (const ValidationError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected ValidationError";
  return {};
}

TEST(Mesh, MinimalTriangleFromObj) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  const Mesh m = read_obj(in);
  EXPECT_EQ(m.vertex_count(), 3u);
  EXPECT_EQ(m.face_count(), 1u);
  EXPECT_EQ(m.edge_count(), 3u);
}

TEST(Mesh, ZeroFaceIndexIsOutOfRange) {
  EXPECT_NE(expect_validation_message("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").find("out-of-range index"),
            std::string::npos);
}

TEST(Mesh, IndexPastEndIsOutOfRange) {
  EXPECT_NE(expect_validation_message("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n").find("out-of-range index"),
            std::string::npos);
}

TEST(Mesh, MalformedRecordsRejected) {
  EXPECT_NE(expect_validation_message("v 0 0\n").find("malformed"), std::string::npos);
  EXPECT_NE(expect_validation_message("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n")
                .find("non-triangular"),
            std::string::npos);
}

TEST(Mesh, SlashFaceTokensUsePositionIndex) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/1/1 3//1\n");
  const Mesh m = read_obj(in);
  EXPECT_EQ(m.faces()[0], (Face{0, 1, 2}));
}

TEST(Mesh, SharedEdgeAppearsOnce) {
  const Mesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, {{0, 1, 2}, {1, 3, 2}});
  EXPECT_EQ(m.edge_count(), 5u);
  const auto edges = m.edges();
  EXPECT_TRUE(std::is_sorted(edges.begin(), edges.end()));
  EXPECT_EQ(std::count(edges.begin(), edges.end(), Edge{1, 2}), 1);
  for (const Edge& e : edges) EXPECT_LT(e.a, e.b);
}

TEST(Mesh, InvariantsEnforced) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 3}}), ValidationError);
  EXPECT_THROW(Mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 1}}), ValidationError);
  EXPECT_THROW(Mesh({{0, 0, 0}, {1, 0, 0}, {0, nan, 0}}, {{0, 1, 2}}), ValidationError);
  EXPECT_THROW(Mesh({{0, 0, 0}, {0, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}), ValidationError);
}

TEST(Mesh, WithVerticesSharesConnectivity) {
  const Mesh m = unit_triangle();
  const Mesh moved = m.with_vertices({{1, 0, 0}, {2, 0, 0}, {1, 1, 0}});
  EXPECT_TRUE(m.same_connectivity(moved));
  EXPECT_THROW((void)m.with_vertices({{0, 0, 0}}), ValidationError);
  const Mesh other({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 2, 1}});
  EXPECT_FALSE(m.same_connectivity(other));
}

TEST(ObjIo, RoundTripIsExact) {
  Rng rng(3);
  const Mesh m = testing::random_closed_mesh(rng);
  std::stringstream buf;
  write_obj(m, buf);
  const Mesh back = read_obj(buf);
  ASSERT_EQ(back.vertex_count(), m.vertex_count());
  EXPECT_TRUE(std::equal(back.faces().begin(), back.faces().end(), m.faces().begin()));
  EXPECT_EQ(testing::max_vertex_distance(back.vertices(), m.vertices()), 0.0);
}

TEST(ObjIo, PointCloudWritesAndReads) {
  const Mesh cloud({{0, 0, 0}, {1, 2, 3}}, std::vector<Face>{});
  std::stringstream buf;
  write_obj(cloud, buf);
  EXPECT_EQ(buf.str().find("f "), std::string::npos);
  const Mesh back = read_obj(buf);
  EXPECT_EQ(back.vertex_count(), 2u);
  EXPECT_EQ(back.face_count(), 0u);
}

TEST(ObjIo, NanMeshNeverReachesWriter) {
  // The Mesh constructor is the gate: a NaN mesh cannot exist to be written.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Mesh({{nan, 0, 0}}, std::vector<Face>{}), ValidationError);
}

TEST(ObjIo, FileErrors) {
  const auto dir = testing::scratch_dir("objio");
  EXPECT_THROW((void)load_mesh(dir / "missing.obj"), IoError);
  save_mesh(unit_triangle(), dir / "tri.obj");
  EXPECT_EQ(load_mesh(dir / "tri.obj").face_count(), 1u);
  EXPECT_THROW(save_mesh(unit_triangle(), dir / "no" / "such" / "dir" / "x.obj"), IoError);
}

TEST(Metrics, PmdExamples) {
  const Mesh m = unit_triangle();
  EXPECT_EQ(pmd(m, m), 0.0);
  const Mesh shifted = m.with_vertices({{1, 0, 0}, {2, 0, 0}, {1, 1, 0}});
  EXPECT_DOUBLE_EQ(pmd(m, shifted), 1.0);
  // Hand evaluation: (|(1,0,0)|^2 + |(0,2,0)|^2) / 2 = (1 + 4) / 2.
  const std::vector<Vec3> a{{0, 0, 0}, {0, 0, 0}};
  const std::vector<Vec3> b{{1, 0, 0}, {0, 2, 0}};
  EXPECT_DOUBLE_EQ(pmd(a, b), 2.5);
  EXPECT_THROW((void)pmd(a, std::vector<Vec3>{{0, 0, 0}}), ValidationError);
}

TEST(Metrics, ChamferExamples) {
  const std::vector<Vec3> a{{0, 0, 0}, {2, 0, 0}};
  const std::vector<Vec3> b{{0, 0, 0}};
  const double oracle = testing::chamfer_oracle(a, b);
  EXPECT_DOUBLE_EQ(oracle, 1.0);
  EXPECT_DOUBLE_EQ(chamfer(a, b), oracle);
  EXPECT_DOUBLE_EQ(chamfer(b, a), oracle);
  const std::vector<Vec3> p{{1, 2, 3}};
  const std::vector<Vec3> q{{2, 4, 6}};
  EXPECT_DOUBLE_EQ(chamfer(p, q), 14.0);
  EXPECT_EQ(chamfer(a, a), 0.0);
  EXPECT_THROW((void)chamfer(a, std::vector<Vec3>{}), ValidationError);
}

TEST(Metrics, ChamferMatchesBruteForceOnRandomClouds) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> a(static_cast<std::size_t>(rng.integer(1, 60)));
    std::vector<Vec3> b(static_cast<std::size_t>(rng.integer(1, 60)));
    for (Vec3& v : a) v = rng.vector(0.0, 3.0);
    for (Vec3& v : b) v = rng.vector(0.0, 3.0);
    EXPECT_NEAR(chamfer(a, b), testing::chamfer_oracle(a, b), 1e-12);
  }
}

TEST(Metrics, EdgeLengths) {
  const auto lengths = edge_lengths(unit_triangle());
  std::vector<double> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  EXPECT_DOUBLE_EQ(sorted[0], 1.0);
  EXPECT_DOUBLE_EQ(sorted[1], 1.0);
  EXPECT_DOUBLE_EQ(sorted[2], std::sqrt(2.0));
}

TEST(Metrics, EdgeLengthsUnderIsometryAndScale) {
  Rng rng(5);
  const Mesh m = testing::random_closed_mesh(rng);
  const Mat3 r = rng.rotation();
  const Vec3 t = rng.vector();
  std::vector<Vec3> moved, scaled;
  for (const Vec3& v : m.vertices()) {
    moved.push_back(r * v + t);
    scaled.push_back(3.0 * v);
  }
  const auto base = edge_lengths(m);
  const auto rigid = edge_lengths(m.with_vertices(moved));
  const auto big = edge_lengths(m.with_vertices(scaled));
  for (std::size_t e = 0; e < base.size(); ++e) {
    EXPECT_NEAR(rigid[e], base[e], 1e-12);
    EXPECT_NEAR(big[e], 3.0 * base[e], 1e-12);
  }
}

TEST(Metrics, ReportJson) {
  MetricReport r;
  r.chamfer = 0.5;
  r.pmd = 0.25;
  const std::string plain = to_json(r);
  EXPECT_NE(plain.find("\"edge_loss\":null"), std::string::npos);
  EXPECT_EQ(plain.find("pmd_1e4"), std::string::npos);
  const std::string scaled = to_json(r, true);
  EXPECT_NE(scaled.find("\"pmd_1e4\":2500"), std::string::npos);
  EXPECT_NE(scaled.find("\"chamfer_1e4\":5000"), std::string::npos);
}

}  // namespace
}  // namespace posekit
