#include "doctest.h"
#include "tf_test_util.hpp"

using namespace teamform;
using namespace teamform::test;

namespace {

// Brings node p into a phase of the requested type with one mediator u.
void enter_phase(DirectHarness& h, NodeId p, NodeId u, bool center,
                 std::int64_t toks) {
  h.driver->set_phase_coin_override(
      [center](NodeId, Instance) { return center ? 1 : 0; });
  h.inject(p, toks);
  h.deliver({u, Role::Utility}, {p, Role::Primary}, msg_of(MsgType::BusyAck));
  h.deliver({u, Role::Utility}, {p, Role::Primary},
            msg_of(MsgType::Channel, 0, 77));
}

}  // namespace

TEST_CASE("injection below the team size goes busy without forming") {
  DirectHarness h(6, 3);
  h.inject(0, 2);
  CHECK(h.inst().principal(0).tok() == 2);
  std::int64_t teams = 0;
  for (const auto& r : h.sim->log().records)
    if (r.kind == RecordKind::TeamForm) ++teams;
  CHECK(teams == 0);
  CHECK(h.sent(MsgType::Busy) > 0);
}

TEST_CASE("a large idle injection forms floor(tok/sigma) teams, remainder re-enters") {
  DirectHarness h(6, 3);
  h.inject(0, 7);
  const LogRecord* team = nullptr;
  for (const auto& r : h.sim->log().records)
    if (r.kind == RecordKind::TeamForm) team = &r;
  REQUIRE(team != nullptr);
  CHECK(team->a == 2);  // two teams of three
  CHECK(team->b == 1);  // one remainder token
  CHECK(h.inst().principal(0).tok() == 0);  // re-injection is still queued
  h.sim->run();
  std::int64_t fakes = 0;
  for (const auto& r : h.sim->log().records)
    if (r.kind == RecordKind::FakeInject) ++fakes;
  CHECK(fakes == 1);
  CHECK(h.inst().principal(0).tok() == 1);  // the remainder re-entered
}

TEST_CASE("an exact multiple leaves no remainder and no re-injection") {
  DirectHarness h(6, 3);
  h.inject(0, 6);
  const LogRecord* team = nullptr;
  for (const auto& r : h.sim->log().records)
    if (r.kind == RecordKind::TeamForm) team = &r;
  REQUIRE(team != nullptr);
  CHECK(team->a == 2);
  CHECK(team->b == 0);
  h.sim->run();
  std::int64_t fakes = 0;
  for (const auto& r : h.sim->log().records)
    if (r.kind == RecordKind::FakeInject) ++fakes;
  CHECK(fakes == 0);
}

TEST_CASE("requests answer by phase type") {
  SUBCASE("center answers TokensPlease with NoTransport") {
    DirectHarness h(6, 5);
    enter_phase(h, 0, 1, /*center=*/true, 3);
    h.deliver({1, Role::Utility}, {0, Role::Primary},
              msg_of(MsgType::TokensPlease));
    CHECK(h.sent(MsgType::NoTransport) == 1);
    CHECK(h.inst().principal(0).tok() == 3);
  }
  SUBCASE("arm answers TokensPlease by transporting everything and retiring") {
    DirectHarness h(6, 5);
    enter_phase(h, 0, 1, /*center=*/false, 3);
    h.deliver({1, Role::Utility}, {0, Role::Primary},
              msg_of(MsgType::TokensPlease));
    auto* tr = h.last_send(MsgType::Transport);
    REQUIRE(tr != nullptr);
    CHECK(tr->a == 3);
    CHECK(h.inst().principal(0).tok() == 0);
    CHECK(h.inst().principal(0).phase == PhaseType::None);  // abrupt end
    CHECK(h.inst().primary_channel(0).meds.empty());
    CHECK(h.sent(MsgType::NotBusy) >= 1);
    // the phase-end record is marked abrupt
    const LogRecord* pe = nullptr;
    for (const auto& r : h.sim->log().records)
      if (r.kind == RecordKind::PhaseEnd) pe = &r;
    REQUIRE(pe != nullptr);
    CHECK(pe->a == 1);
  }
  SUBCASE("arm answers Waiting with GoOn") {
    DirectHarness h(6, 5);
    enter_phase(h, 0, 1, /*center=*/false, 3);
    h.deliver({1, Role::Utility}, {0, Role::Primary},
              msg_of(MsgType::Waiting));
    CHECK(h.sent(MsgType::GoOn) == 1);
  }
  SUBCASE("center delays its answer to Waiting") {
    DirectHarness h(6, 5);
    enter_phase(h, 0, 1, /*center=*/true, 3);
    h.deliver({1, Role::Utility}, {0, Role::Primary},
              msg_of(MsgType::Waiting));
    CHECK(h.sent(MsgType::GoOn) == 0);
    CHECK(h.inst().principal(0).delaying.at(1));
  }
}

TEST_CASE("delayed Waiting: an arm successor sends GoOn first, a center forgets") {
  SUBCASE("next phase arm: GoOn precedes the Waiting request") {
    DirectHarness h(6, 5);
    enter_phase(h, 0, 1, /*center=*/true, 3);
    h.deliver({1, Role::Utility}, {0, Role::Primary},
              msg_of(MsgType::Waiting));
    // end the center phase: the awaited NoTransport arrives
    h.driver->set_phase_coin_override([](NodeId, Instance) { return 0; });
    h.deliver({1, Role::Utility}, {0, Role::Primary},
              msg_of(MsgType::NoTransport));
    // new phase began as arm: GoOn then Waiting, delaying cleared
    std::vector<MsgType> order;
    for (const auto& r : h.sim->log().records)
      if (r.kind == RecordKind::Send && r.has_msg &&
          (r.msg == MsgType::GoOn || r.msg == MsgType::Waiting))
        order.push_back(r.msg);
    REQUIRE(order.size() == 2);
    CHECK(order[0] == MsgType::GoOn);
    CHECK(order[1] == MsgType::Waiting);
    CHECK_FALSE(h.inst().principal(0).delaying.at(1));
    CHECK(h.inst().principal(0).awaiting.at(1));
  }
  SUBCASE("next phase center: the delayed response is dropped") {
    DirectHarness h(6, 5);
    enter_phase(h, 0, 1, /*center=*/true, 3);
    h.deliver({1, Role::Utility}, {0, Role::Primary},
              msg_of(MsgType::Waiting));
    h.deliver({1, Role::Utility}, {0, Role::Primary},
              msg_of(MsgType::NoTransport));
    CHECK(h.sent(MsgType::GoOn) == 0);
    CHECK(h.sent(MsgType::TokensPlease) == 2);  // first phase + second phase
    CHECK_FALSE(h.inst().principal(0).delaying.at(1));
  }
}

TEST_CASE("responses only clear the flag when the type matches the phase") {
  DirectHarness h(6, 5);
  enter_phase(h, 0, 1, /*center=*/true, 3);
  REQUIRE(h.inst().principal(0).awaiting.at(1));

  // a center ignores GoOn entirely
  h.deliver({1, Role::Utility}, {0, Role::Primary}, msg_of(MsgType::GoOn));
  CHECK(h.inst().principal(0).awaiting.at(1));
  CHECK(h.inst().principal(0).phase == PhaseType::Center);

  // Transport adds tokens and clears the flag for a center; tok reaches the
  // team size so the phase ends and a team forms in the same activation
  Msg tr = msg_of(MsgType::Transport, 2);
  tr.colors = 1;
  h.deliver({1, Role::Utility}, {0, Role::Primary}, tr);
  std::int64_t teams = 0;
  for (const auto& r : h.sim->log().records)
    if (r.kind == RecordKind::TeamForm) teams += r.a;
  CHECK(teams == 1);
  CHECK(h.inst().principal(0).tok() == 0);
}

TEST_CASE("mid-phase injections are buffered and folded in at phase end") {
  DirectHarness h(6, 5);
  enter_phase(h, 0, 1, /*center=*/true, 3);
  h.inject(0, 1);
  CHECK(h.inst().principal(0).tok() == 3);  // unchanged during the phase
  CHECK(h.inst().principal(0).pending() == 1);
  h.deliver({1, Role::Utility}, {0, Role::Primary},
            msg_of(MsgType::NoTransport));
  CHECK(h.inst().principal(0).pending() == 0);
  CHECK(h.inst().principal(0).tok() == 4);
}

TEST_CASE("a center phase with several channels sends a request on each") {
  DirectHarness h(6, 9);
  h.driver->set_phase_coin_override([](NodeId, Instance) { return 1; });
  h.inject(0, 4);
  for (NodeId u : {1, 2}) {
    h.deliver({u, Role::Utility}, {0, Role::Primary}, msg_of(MsgType::BusyAck));
    h.deliver({u, Role::Utility}, {0, Role::Primary},
              msg_of(MsgType::Channel, 0, 100 + u));
  }
  // the first channel started the phase; the second joined mid-phase with a
  // fresh false flag and no request until the next phase
  CHECK(h.sent(MsgType::TokensPlease) == 1);
  CHECK(h.inst().principal(0).awaiting.at(1));
  CHECK_FALSE(h.inst().principal(0).awaiting.at(2));
  h.deliver({1, Role::Utility}, {0, Role::Primary},
            msg_of(MsgType::NoTransport));
  // phase ended, next one requests on both channels
  CHECK(h.sent(MsgType::TokensPlease) == 3);
  CHECK(h.inst().principal(0).awaiting.at(2));
}

TEST_CASE("losing every channel ends the phase and clears the phase type") {
  DirectHarness h(6, 9);
  enter_phase(h, 0, 1, /*center=*/true, 4);
  h.deliver({1, Role::Utility}, {0, Role::Primary},
            msg_of(MsgType::NoChannel, 0, 77));
  CHECK(h.inst().principal(0).phase == PhaseType::None);
  CHECK(h.inst().principal(0).tok() == 4);  // still busy, just not operational
  CHECK(h.inst().primary_channel(0).meds.empty());
}
