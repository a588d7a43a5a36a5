#include "blenderlab/blender.hpp"
#include "blenderlab/cover.hpp"
#include "blenderlab/globalization.hpp"
#include "blenderlab/grassmann.hpp"
#include "blenderlab/pipeline.hpp"
#include "blenderlab/symplectic.hpp"

#include <benchmark/benchmark.h>

using namespace blenderlab;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

FiberMap saddle() {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 0.5;
  m(1, 1) = 2.0;
  return FiberMap::affine(m, vec2(0.5, -1.0));
}

void BM_BlendingCover(benchmark::State& state) {
  const auto br = build_blending_region(saddle(), 1.0, BlendingKind::Double);
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verify_blending_region(br.maps, br.spec, h).margin());
}
BENCHMARK(BM_BlendingCover)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_TangencyCover(benchmark::State& state) {
  const PipelineConfig cfg;
  const ArcSystem arc = build_arc(cfg);
  const auto spec = b1_tangency_spec(arc.system, arc.layout);
  for (auto _ : state)
    benchmark::DoNotOptimize(verify_tangency_blending(spec, cfg.tangency_base_net, cfg.tangency_plane_net).cover.margin);
}
BENCHMARK(BM_TangencyCover)->Unit(benchmark::kMillisecond);

void BM_SemigroupCoverage(benchmark::State& state) {
  std::vector<FiberMap> gens;
  for (const auto& t : {vec2(0.1, 0), vec2(-0.1, 0), vec2(0, 0.1), vec2(0, -0.1)})
    gens.push_back(FiberMap::affine(Mat::Identity(2, 2), t));
  const auto net = make_net(Region::box_from_corners(vec2(0, 0), vec2(3, 3)), 0.05);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        semigroup_coverage(gens, Region::ball(vec2(1.5, 1.5), 0.08), net, 60, SemigroupDirection::Forward).margin);
}
BENCHMARK(BM_SemigroupCoverage)->Unit(benchmark::kMillisecond);

void BM_BumpApply(benchmark::State& state) {
  const FiberMap f = hamiltonian_bump_translation(vec2(0, 0), 0.5, 1.5, vec2(0.1, -0.05));
  Vec x = vec2(0.9, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(f.apply(x));
}
BENCHMARK(BM_BumpApply);

void BM_ChartFamily(benchmark::State& state) {
  const Region dom = Region::box_from_corners(vec2(0, 0), vec2(3, 3));
  for (auto _ : state) benchmark::DoNotOptimize(chart_family(dom, 0.39).generators.size());
}
BENCHMARK(BM_ChartFamily)->Unit(benchmark::kMillisecond);

void BM_CertifyFlagship(benchmark::State& state) {
  const PipelineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(certify(cfg).overall);
}
BENCHMARK(BM_CertifyFlagship)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
