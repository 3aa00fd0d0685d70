#include <benchmark/benchmark.h>

#include "teamform/kernel.hpp"

using namespace teamform;

namespace {

struct Bouncer : Protocol {
  void on_start(Simulation&, NodeId) override {}
  void on_inject(Simulation& sim, NodeId node, const InjectPayload& p) override {
    sim.note_tok(node, 0, 0, p.count);  // the token stays put
    Msg m;
    m.type = MsgType::Busy;
    sim.send({node, Role::Primary}, {(node + 1) % sim.n(), Role::Utility}, 0,
             m);
  }
  void on_deliver(Simulation& sim, const Envelope& env) override {
    if (env.deliver.ticks > 2000 * kTicksPerUnit) return;
    Msg m;
    m.type = MsgType::Busy;
    sim.send(env.dst, {(env.dst.node + 1) % sim.n(), Role::Utility}, 0, m);
  }
};

void BM_EventLoop(benchmark::State& state) {
  for (auto _ : state) {
    SimOptions so;
    so.n = 16;
    so.seed = 1;
    so.max_time = 2001 * kTicksPerUnit;
    Simulation sim(so, std::make_unique<UniformRandomPolicy>());
    Bouncer b;
    sim.set_protocol(&b);
    sim.schedule_injection({0, 0, 1, 0, 0, 1});
    sim.run();
    benchmark::DoNotOptimize(sim.log().records.size());
    state.counters["events"] = static_cast<double>(sim.log().records.size());
  }
}
BENCHMARK(BM_EventLoop)->Unit(benchmark::kMillisecond);

}  // namespace
