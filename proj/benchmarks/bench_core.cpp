#include <benchmark/benchmark.h>

#include "rdc/config.hpp"
#include "rdc/dipole.hpp"
#include "rdc/enhance.hpp"
#include "rdc/model.hpp"
#include "rdc/tmm.hpp"

using namespace rdc;

namespace {

const RunConfig& rdc50() {
  static const RunConfig cfg = load_config(std::string(RDC_PRESET_DIR) + "/rdc50.cfg");
  return cfg;
}

}  // namespace

static void BM_StackRT(benchmark::State& state) {
  const auto sc = stack_scenario(rdc50());
  double u = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stack_rt(sc.stack, Polarization::p, 810.0, u));
    u = u < 0.9 ? u + 0.01 : 0.0;
  }
}
BENCHMARK(BM_StackRT);

static void BM_Purcell(benchmark::State& state) {
  const auto sc = stack_scenario(rdc50());
  for (auto _ : state) benchmark::DoNotOptimize(purcell(sc.stack, sc.emitter, 810.0));
}
BENCHMARK(BM_Purcell)->Unit(benchmark::kMicrosecond);

static void BM_Enhancement(benchmark::State& state) {
  const auto& cfg = rdc50();
  const auto s = stack_scenario(cfg);
  const auto r = reference_scenario(cfg);
  auto opt = enhancement_options(cfg);
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(pl_enhancement(s, r, opt));
}
BENCHMARK(BM_Enhancement)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
