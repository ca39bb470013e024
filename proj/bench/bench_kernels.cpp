// Serial reference vs OpenMP path for the per-via-point kernels on a densely
// sampled Tr8.

#include <benchmark/benchmark.h>

#include "pkm/reconfig.hpp"
#include "pkm/sweep.hpp"

namespace {

using namespace pkm;

const ViaPointSeries& dense_tr8() {
  static const ViaPointSeries s = [] {
    TrajectorySpec spec = catalog().at("Tr8");
    spec.dt = 0.01;
    return build(spec);
  }();
  return s;
}

Exec policy(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void BM_DetSweep(benchmark::State& st) {
  const auto poses = dense_tr8().poses();
  const PlatformGeometry g;
  for (auto _ : st) benchmark::DoNotOptimize(det_phi_x_sweep(g, poses, policy(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(poses.size()));
}

void BM_ForcesAlongPath(benchmark::State& st) {
  const PlatformGeometry g;
  const PhysicalParams ph;
  for (auto _ : st) benchmark::DoNotOptimize(forces_along_path(g, ph, dense_tr8(), policy(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(dense_tr8().size()));
}

void BM_VerifyDesign(benchmark::State& st) {
  const PlatformGeometry g;
  const PhysicalParams ph;
  for (auto _ : st) benchmark::DoNotOptimize(verify_design(g, ph, dense_tr8(), policy(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(dense_tr8().size()));
}

}  // namespace

BENCHMARK(BM_DetSweep)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ForcesAlongPath)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_VerifyDesign)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
