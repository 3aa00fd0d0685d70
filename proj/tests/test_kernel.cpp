#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "teamform/kernel.hpp"

using namespace teamform;

namespace {

// Absorbs injections into a per-node token count and sends scripted messages,
// enough to exercise the kernel without the gathering protocol.
struct TokenSink : Protocol {
  std::map<NodeId, std::int64_t> tok;
  std::function<void(Simulation&, NodeId)> on_inject_hook;

  void on_start(Simulation&, NodeId) override {}
  void on_inject(Simulation& sim, NodeId node, const InjectPayload& p) override {
    auto before = tok[node];
    tok[node] += p.count;
    sim.note_tok(node, p.instance, before, tok[node]);
    if (on_inject_hook) on_inject_hook(sim, node);
  }
  void on_deliver(Simulation&, const Envelope&) override {}
};

SimOptions opts(int n, std::uint64_t seed = 1, double eps = 1.0) {
  SimOptions o;
  o.n = n;
  o.seed = seed;
  o.epsilon = eps;
  return o;
}

std::vector<LogRecord> records_of_kind(const Simulation& sim, RecordKind k) {
  std::vector<LogRecord> out;
  for (const auto& r : sim.log().records)
    if (r.kind == k) out.push_back(r);
  return out;
}

}  // namespace

TEST_CASE("rational time strings reduce exactly") {
  CHECK(rational_string(0) == "0");
  CHECK(rational_string(kTicksPerUnit) == "1");
  CHECK(rational_string(kTicksPerUnit / 2) == "1/2");
  CHECK(rational_string(3 * kTicksPerUnit / 4) == "3/4");
  CHECK(rational_string(5 * kTicksPerUnit) == "5");
}

TEST_CASE("single send honors the requested delay") {
  ScriptedPolicy::Script s;
  s.delays = {ticks_from_units(0.9)};
  s.injections = {{0, 0, 1, 0, 0, 1}};
  auto sim = Simulation(opts(2), std::make_unique<ScriptedPolicy>(s));
  TokenSink sink;
  sink.on_inject_hook = [](Simulation& sim, NodeId v) {
    Msg m;
    m.type = MsgType::Busy;
    sim.send({v, Role::Primary}, {1, Role::Utility}, 0, m);
  };
  sim.set_protocol(&sink);
  sim.schedule_injection_plan();
  REQUIRE(sim.run());
  auto delivers = records_of_kind(sim, RecordKind::Deliver);
  REQUIRE(delivers.size() == 1);
  CHECK(delivers[0].t == ticks_from_units(0.9));
}

TEST_CASE("fifo floor: a later faster message never undercuts") {
  // m1 at t=0 with delay 0.9; m2 at t=0.1 with delay 0.3 on the same link.
  // m2's nominal arrival 0.4 is lifted to the floor 0.9 and ordered after m1.
  ScriptedPolicy::Script s;
  s.delays = {ticks_from_units(0.9), ticks_from_units(0.3)};
  s.injections = {{0, 0, 1, 0, 0, 1}, {ticks_from_units(0.1), 0, 1, 0, 0, 1}};
  auto sim = Simulation(opts(2), std::make_unique<ScriptedPolicy>(s));
  TokenSink sink;
  sink.on_inject_hook = [](Simulation& sim, NodeId v) {
    Msg m;
    m.type = MsgType::Busy;
    sim.send({v, Role::Primary}, {1, Role::Utility}, 0, m);
  };
  sim.set_protocol(&sink);
  sim.schedule_injection_plan();
  REQUIRE(sim.run());
  auto delivers = records_of_kind(sim, RecordKind::Deliver);
  REQUIRE(delivers.size() == 2);
  CHECK(delivers[0].t == ticks_from_units(0.9));
  CHECK(delivers[1].t == ticks_from_units(0.9));
  // FIFO: delivery order equals send order (envelope ids ascend).
  CHECK(delivers[0].d < delivers[1].d);
}

TEST_CASE("zero and over-unit delays abort the run as adversary bugs") {
  for (double bad : {0.0, 1.5}) {
    ScriptedPolicy::Script s;
    s.delays = {ticks_from_units(bad)};
    s.injections = {{0, 0, 1, 0, 0, 1}};
    auto sim = Simulation(opts(2), std::make_unique<ScriptedPolicy>(s));
    TokenSink sink;
    sink.on_inject_hook = [](Simulation& sim, NodeId v) {
      Msg m;
      m.type = MsgType::Busy;
      sim.send({v, Role::Primary}, {1, Role::Utility}, 0, m);
    };
    sim.set_protocol(&sink);
    sim.schedule_injection_plan();
    CHECK_FALSE(sim.run());
    CHECK(sim.aborted());
  }
}

TEST_CASE("equal nominal times process in scheduling order with distinct seqs") {
  ScriptedPolicy::Script s;
  s.delays = {kTicksPerUnit, kTicksPerUnit};
  s.injections = {{0, 0, 1, 0, 0, 1}};
  auto sim = Simulation(opts(3), std::make_unique<ScriptedPolicy>(s));
  TokenSink sink;
  sink.on_inject_hook = [](Simulation& sim, NodeId v) {
    Msg m;
    m.type = MsgType::Busy;
    sim.send({v, Role::Primary}, {1, Role::Utility}, 0, m);
    sim.send({v, Role::Primary}, {2, Role::Utility}, 0, m);
  };
  sim.set_protocol(&sink);
  sim.schedule_injection_plan();
  REQUIRE(sim.run());
  auto delivers = records_of_kind(sim, RecordKind::Deliver);
  REQUIRE(delivers.size() == 2);
  CHECK(delivers[0].t == delivers[1].t);
  CHECK(delivers[0].node == 1);
  CHECK(delivers[1].node == 2);
}

TEST_CASE("quiescence: tokens or in-flight messages block it") {
  auto sim = Simulation(opts(2), std::make_unique<UniformRandomPolicy>());
  TokenSink sink;
  sim.set_protocol(&sink);
  CHECK(sim.is_quiescent());  // fresh system

  sim.schedule_injection({0, 0, 1, 0, 0, 1});
  REQUIRE(sim.run());
  CHECK_FALSE(sim.is_quiescent());  // one token held
  CHECK(sim.physical_tokens(0) == 1);
}

TEST_CASE("toggles: only fragile nodes, only at quiescent times") {
  // epsilon 0.5 over 4 nodes: up to 2 fragile.
  auto policy = std::make_unique<UniformRandomPolicy>();
  auto sim = Simulation(opts(4, 7, 0.5), std::move(policy));
  TokenSink sink;
  sim.set_protocol(&sink);
  auto fragile = sim.fragile_set();
  REQUIRE(fragile.size() == 2);
  NodeId f = fragile[0];
  NodeId sturdy = -1;
  for (NodeId v = 0; v < 4; ++v)
    if (!sim.fragile(v)) {
      sturdy = v;
      break;
    }

  std::string err;
  CHECK(sim.toggle_status(f, kTicksPerUnit, &err));  // quiescent now
  CHECK_FALSE(sim.faulty(f));                        // was faulty at start
  CHECK_FALSE(sim.toggle_status(sturdy, kTicksPerUnit, &err));
  CHECK(err == "toggle of a non-fragile node");

  sim.schedule_injection({2 * kTicksPerUnit, sturdy, 1, 0, 0, 1});
  REQUIRE(sim.run());
  CHECK_FALSE(sim.toggle_status(f, 3 * kTicksPerUnit, &err));
  CHECK(err == "toggle at a non-quiescent time");
}

TEST_CASE("fragile members start faulty and are logged") {
  auto sim =
      Simulation(opts(10, 3, 0.3), std::make_unique<UniformRandomPolicy>());
  CHECK(sim.fragile_set().size() == 7);  // n - ceil(0.3 * 10)
  for (NodeId f : sim.fragile_set()) CHECK(sim.faulty(f));
  CHECK(records_of_kind(sim, RecordKind::Toggle).size() == 7);
}

TEST_CASE("conservation ledger balances, limbo collects faulty drops") {
  ScriptedPolicy::Script s;
  s.fragile = {1};
  s.delays = {ticks_from_units(0.5)};
  s.injections = {{0, 0, 1, 0, 0, 1}};
  auto sim = Simulation(opts(4, 1, 0.5), std::make_unique<ScriptedPolicy>(s));
  TokenSink sink;
  sink.on_inject_hook = [&sink](Simulation& sim, NodeId v) {
    Msg m;
    m.type = MsgType::Transport;
    m.k = 1;
    sim.send({v, Role::Primary}, {1, Role::Utility}, 0, m);
    // The token rides the wire now.
    sim.note_tok(v, 0, 1, 0);
    sink.tok[v] = 0;
  };
  sim.set_protocol(&sink);
  sim.schedule_injection_plan();
  REQUIRE(sim.run());
  auto led = sim.ledger();
  CHECK(led.injected == 1);
  CHECK(led.limbo == 1);  // node 1 is fragile and starts faulty
  CHECK(led.balanced());
  CHECK(records_of_kind(sim, RecordKind::DropFaulty).size() == 1);
}

TEST_CASE("determinism: same seed and config, identical log") {
  for (std::uint64_t seed : {11ull, 99ull}) {
    auto run = [&](std::uint64_t s) {
      auto sim =
          Simulation(opts(6, s, 0.5), std::make_unique<UniformRandomPolicy>());
      TokenSink sink;
      sink.on_inject_hook = [](Simulation& sim, NodeId v) {
        Msg m;
        m.type = MsgType::Busy;
        for (NodeId u = 0; u < sim.n(); ++u)
          if (u != v) sim.send({v, Role::Primary}, {u, Role::Utility}, 0, m);
      };
      sim.set_protocol(&sink);
      for (int i = 0; i < 5; ++i)
        sim.schedule_injection({i * kTicksPerUnit / 3, -1, 1, 0, 0, 1});
      REQUIRE(sim.run());
      return sim.log().to_jsonl();
    };
    CHECK(run(seed) == run(seed));
    CHECK(run(seed) != run(seed + 1));
  }
}

TEST_CASE("scripted policy replays verbatim and rejects unknown keys") {
  std::string err;
  auto p = ScriptedPolicy::from_json(
      R"({"delays": [0.5, 1.0], "injections": [{"t": 0, "node": 2, "count": 3}]})",
      err);
  REQUIRE(p != nullptr);
  auto plan = p->injection_plan();
  REQUIRE(plan.size() == 1);
  CHECK(plan[0].node == 2);
  CHECK(plan[0].count == 3);

  CHECK(ScriptedPolicy::from_json(R"({"nope": 1})", err) == nullptr);
  CHECK(err == "scripted policy: unknown key 'nope'");
  CHECK(ScriptedPolicy::from_json(R"({"delays": [0]})", err) == nullptr);
}

TEST_CASE("fragile set bounds and replayability") {
  UniformRandomPolicy pol;
  Rng rng(42);
  auto f1 = pol.choose_fragile(10, 1.0, rng);
  CHECK(f1.empty());  // epsilon 1: everyone stays non-faulty

  Rng r2(42), r3(42);
  auto a = pol.choose_fragile(100, 0.1, r2);
  auto b = pol.choose_fragile(100, 0.1, r3);
  CHECK(a.size() == 90);
  CHECK(a == b);  // same seed, same set

  Rng r4(43);
  CHECK(pol.choose_fragile(10, 0.3, r4).size() == 7);
  CHECK_THROWS(pol.choose_fragile(10, 0.0, r4));
}

TEST_CASE("adversary delay draws stay in (0.1, 1] and respect busy pairs") {
  UniformRandomPolicy uni;
  AntiGatherPolicy anti;
  Rng rng(5);
  DelayQuery q;
  for (int i = 0; i < 2000; ++i) {
    Tick d = uni.delay(q, rng);
    CHECK(d > kTicksPerUnit / 10);
    CHECK(d <= kTicksPerUnit);
  }
  q.src_busy = q.dst_busy = true;
  CHECK(anti.delay(q, rng) == kTicksPerUnit);
  q.dst_busy = false;
  Tick d = anti.delay(q, rng);
  CHECK(d <= kTicksPerUnit);
}

TEST_CASE("jsonl round trip") {
  auto sim = Simulation(opts(3, 5), std::make_unique<UniformRandomPolicy>());
  TokenSink sink;
  sim.set_protocol(&sink);
  sim.schedule_injection({0, 1, 4, 0, 0, 1});
  REQUIRE(sim.run());
  std::string text = sim.log().to_jsonl();
  std::istringstream in(text);
  auto parsed = parse_jsonl(in);
  REQUIRE(parsed.has_value());
  CHECK(parsed->seed == 5);
  REQUIRE(parsed->records.size() == sim.log().records.size());
  for (std::size_t i = 0; i < parsed->records.size(); ++i) {
    CHECK(parsed->records[i].t == sim.log().records[i].t);
    CHECK(parsed->records[i].kind == sim.log().records[i].kind);
    CHECK(parsed->records[i].a == sim.log().records[i].a);
  }
}
