#include <benchmark/benchmark.h>

#include "teamform/lowerbound.hpp"

using namespace teamform;

namespace {

void BM_BernoulliTrials(benchmark::State& state) {
  CeParams p;
  p.n = 1000;
  p.sigma = 16;
  p.f = 50;
  for (auto _ : state) {
    auto res = simulate_ce(p, state.range(0), 5, CeMode::Bernoulli);
    benchmark::DoNotOptimize(res.p_no_hit_empirical);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BernoulliTrials)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_MechanisticTrials(benchmark::State& state) {
  CeParams p;
  p.n = 1000;
  p.sigma = 16;
  p.f = 50;
  for (auto _ : state) {
    auto res = simulate_ce(p, state.range(0), 5, CeMode::Mechanistic);
    benchmark::DoNotOptimize(res.per_round_hit_rate);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MechanisticTrials)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
