#include <benchmark/benchmark.h>

#include "afft/normals.hpp"
#include "afft/parallel.hpp"
#include "afft/query.hpp"
#include "afft/sampling.hpp"
#include "afft/synthgen.hpp"
#include "afft/tensor.hpp"

using namespace afft;

namespace {

struct Setup {
  InteractionExample example;
  AffordanceDescriptor descriptor;
  PointCloud scene;
};

// Bowl over a table, queried on the same table with supports.
const Setup& setup() {
  static const Setup s = [] {
    Setup out;
    const auto fx = *find_training_fixture("bowl-on-table");
    out.example = build_training_example(fx);
    const InteractionTensor t = compute_tensor(out.example, 0.0, 0);
    DescriptorOptions o;
    o.n_aff = fx.n_aff;
    o.s_aff = fx.s_aff;
    out.descriptor = sample_descriptor(t, out.example, o);
    ScenePreset table;
    out.scene = sample_mesh_surface(generate_scene(table), 2e4, 3);
    return out;
  }();
  return s;
}

Exec mode(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_Bisector(benchmark::State& state) {
  const auto& s = setup();
  for (auto _ : state) benchmark::DoNotOptimize(compute_tensor(s.example, 0.0, 0, {}, mode(state)));
}

void BM_Query(benchmark::State& state) {
  const auto& s = setup();
  QueryConfig cfg;
  cfg.sample_fraction = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(run_query(s.descriptor, s.scene, cfg, mode(state)));
}

void BM_Normals(benchmark::State& state) {
  const auto& s = setup();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_normals(s.scene, 16, Vec3::UnitZ(), mode(state)));
}

}  // namespace

// Argument 0 runs the serial reference, 1 the OpenMP kernel.
BENCHMARK(BM_Bisector)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Query)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Normals)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
