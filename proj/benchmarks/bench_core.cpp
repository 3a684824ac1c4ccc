#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "roundtable/alignment.hpp"
#include "roundtable/attention.hpp"
#include "roundtable/head_pose.hpp"
#include "roundtable/pnp.hpp"
#include "roundtable/rotation.hpp"
#include "roundtable/simulator.hpp"
#include "roundtable/stats.hpp"

namespace {

using namespace roundtable;

void BM_SolvePnp(benchmark::State& state) {
  const FaceModel3D model = FaceModel3D::generic_v1();
  const CameraModel camera;
  const auto px = project_model(model, camera, euler_to_matrix({-10.0, 25.0, 5.0}), Vec3(20.0, -10.0, 900.0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_pnp(px, model, camera));
}
BENCHMARK(BM_SolvePnp);

Synthesis session_of(double duration_s, double noise_px) {
  RandomScenarioOptions opt;
  opt.duration_s = duration_s;
  opt.noise_px = noise_px;
  return synthesize(random_scenario(42, opt));
}

void BM_EstimateSessionPoses(benchmark::State& state) {
  const Synthesis syn = session_of(10.0, 1.0);
  const FaceModel3D model = FaceModel3D::generic_v1();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_session_poses(syn.bundle, model, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(syn.bundle.frames.size()));
}
BENCHMARK(BM_EstimateSessionPoses)->Unit(benchmark::kMillisecond);

void BM_ClassifySession(benchmark::State& state) {
  const Synthesis syn = session_of(10.0, 0.0);
  const auto poses = estimate_session_poses(syn.bundle, FaceModel3D::generic_v1(), {});
  for (auto _ : state) benchmark::DoNotOptimize(classify_session(syn.bundle.session, poses));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(poses.size()));
}
BENCHMARK(BM_ClassifySession);

void BM_AttentionDuringSpeech(benchmark::State& state) {
  const Synthesis syn = session_of(60.0, 0.0);
  std::vector<AttentionRecord> recs;
  for (const auto& f : syn.truth.frames) recs.push_back({f.frame_idx, f.observer, f.target});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        attention_during_speech(recs, syn.bundle.segments, syn.bundle.session.layout, syn.bundle.session.fps));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(recs.size()));
}
BENCHMARK(BM_AttentionDuringSpeech);

void BM_ShapiroWilk(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(shapiro_wilk(x));
}
BENCHMARK(BM_ShapiroWilk)->Arg(10)->Arg(100)->Arg(1000);

void BM_Synthesize(benchmark::State& state) {
  RandomScenarioOptions opt;
  opt.duration_s = 10.0;
  opt.noise_px = 2.0;
  const Scenario sc = random_scenario(42, opt);
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(sc));
}
BENCHMARK(BM_Synthesize)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
