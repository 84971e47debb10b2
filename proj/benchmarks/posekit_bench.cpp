#include <numbers>

#include <benchmark/benchmark.h>

#include "posekit/posekit.hpp"

namespace posekit {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Puppet bench_puppet(int segments, int rings, int sectors) {
  PuppetSpec spec;
  spec.segments = segments;
  spec.bend = 40 * kDeg;
  spec.twist = 30 * kDeg;
  spec.seed = 3;
  spec.rings_per_segment = rings;
  spec.sectors = sectors;
  return make_puppet(spec);
}

void BM_Chamfer(benchmark::State& state) {
  const int rings = static_cast<int>(state.range(0));
  const Puppet p = bench_puppet(2, rings, 32);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(p.rest.mesh, p.posed.mesh));
  state.counters["vertices"] = static_cast<double>(p.rest.mesh.vertex_count());
}
BENCHMARK(BM_Chamfer)->Arg(8)->Arg(32)->Arg(128);

void BM_GmmWeights(benchmark::State& state) {
  const int segments = static_cast<int>(state.range(0));
  const Puppet p = bench_puppet(segments, 16, 32);
  const GmmParams params = make_gmm_params(p.rest.keypoints, p.tree);
  for (auto _ : state) benchmark::DoNotOptimize(gmm_weights(p.rest.mesh.vertices(), params));
  state.counters["vertices"] = static_cast<double>(p.rest.mesh.vertex_count());
}
BENCHMARK(BM_GmmWeights)->Arg(2)->Arg(8)->Arg(24);

void BM_Lbs(benchmark::State& state) {
  const int segments = static_cast<int>(state.range(0));
  const Puppet p = bench_puppet(segments, 16, 32);
  const SkinningMatrix w = gmm_weights(p.rest.mesh.vertices(), make_gmm_params(p.rest.keypoints, p.tree));
  const BoneTransformSet fk =
      forward_kinematics(p.rest.keypoints, scalable_ik(p.rest.keypoints, p.posed.keypoints, {}, p.tree), p.tree);
  for (auto _ : state) benchmark::DoNotOptimize(lbs_vertices(p.rest.mesh.vertices(), w, fk.transforms));
}
BENCHMARK(BM_Lbs)->Arg(2)->Arg(8)->Arg(24);

void BM_ScalableIk(benchmark::State& state) {
  const int segments = static_cast<int>(state.range(0));
  const Puppet p = bench_puppet(segments, 2, 8);
  for (auto _ : state) {
    const IkSolution ik = scalable_ik(p.rest.keypoints, p.posed.keypoints, {}, p.tree);
    benchmark::DoNotOptimize(forward_kinematics(p.rest.keypoints, ik, p.tree));
  }
}
BENCHMARK(BM_ScalableIk)->Arg(2)->Arg(24)->Arg(96);

void BM_PuppetTransfer(benchmark::State& state) {
  const Puppet p = bench_puppet(2, static_cast<int>(state.range(0)), 16);
  const TransferConfig cfg(p.tree);
  TransferInputs in;
  in.self_reference = &p.posed.mesh;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pose_transfer(p.rest.mesh, p.rest.keypoints, p.posed.keypoints, cfg, in));
  }
}
BENCHMARK(BM_PuppetTransfer)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace posekit

BENCHMARK_MAIN();
