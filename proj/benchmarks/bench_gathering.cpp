#include <benchmark/benchmark.h>

#include "teamform/experiment.hpp"

using namespace teamform;

namespace {

void BM_GatheringRun(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    RunConfig cfg;
    cfg.experiment = "tf";
    cfg.n = n;
    cfg.sigma = 3;
    cfg.seed = 11;
    cfg.checkers = false;
    for (int i = 0; i < 10; ++i) {
      InjectionEvent e;
      e.t = ticks_from_units(0.37 * i);
      e.node = -1;
      cfg.injections.push_back(e);
    }
    auto r = run_experiment(cfg);
    benchmark::DoNotOptimize(r.teams);
  }
}
BENCHMARK(BM_GatheringRun)->Arg(32)->Arg(128)->Arg(512)
    ->Unit(benchmark::kMillisecond);

void BM_CheckerSweep(benchmark::State& state) {
  RunConfig cfg;
  cfg.experiment = "tf";
  cfg.n = 128;
  cfg.sigma = 3;
  cfg.seed = 11;
  cfg.checkers = false;
  for (int i = 0; i < 10; ++i) {
    InjectionEvent e;
    e.t = ticks_from_units(0.37 * i);
    e.node = -1;
    cfg.injections.push_back(e);
  }
  auto r = run_experiment(cfg);
  auto ctx = r.check_context();
  for (auto _ : state) {
    auto v = run_all_checkers(*r.log, ctx);
    benchmark::DoNotOptimize(v.size());
  }
}
BENCHMARK(BM_CheckerSweep)->Unit(benchmark::kMillisecond);

}  // namespace
