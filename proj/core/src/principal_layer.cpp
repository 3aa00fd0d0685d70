#include <cassert>

#include "teamform/tf_machine.hpp"

namespace teamform {

bool TfInstance::can_form(NodeId p) const {
  const auto& s = pr_[p];
  if (params_.diff_mode) return s.tok_c[0] >= 1 && s.tok_c[1] >= 1;
  return s.tok() >= params_.sigma;
}

void TfInstance::send_relayed(Simulation& sim, NodeId p, NodeId u, Msg m) {
  sim.send({p, Role::Primary}, {u, Role::Utility}, params_.instance,
           std::move(m));
}

void TfInstance::gain_tokens(Simulation& sim, NodeId p, std::uint8_t colors,
                             std::int64_t count, std::int64_t term) {
  auto& s = pr_[p];
  const std::int64_t before = s.tok();
  s.tok_c[colors == 2 ? 1 : 0] += count;
  s.term += term;
  sim.note_tok(p, params_.instance, before, s.tok());
  if (before == 0)
    chan_busy_broadcast(sim, p);
  else
    chan_tok_increase(sim, p);
}

void TfInstance::handle_injection(Simulation& sim, NodeId p,
                                  const InjectPayload& pay) {
  auto& s = pr_[p];
  if (!pay.fake)
    trace_->add_origins(p, params_.instance, pay.colors == 2 ? 1 : 0,
                        pay.count, pay.term);
  if (pc_[p].meds.empty()) {
    gain_tokens(sim, p, pay.colors, pay.count, pay.term);
    if (can_form(p) && !driver_->faults().skip_form_on_inject)
      form_teams(sim, p);
  } else {
    // Injections during a phase take effect when the phase ends.
    assert(s.phase != PhaseType::None);
    const std::int64_t before = s.pending();
    s.pending_c[pay.colors == 2 ? 1 : 0] += pay.count;
    s.pending_term += pay.term;
    sim.note_pending(p, params_.instance, before, s.pending());
  }
}

void TfInstance::principal_channel_added(Simulation& sim, NodeId p, NodeId u) {
  auto& s = pr_[p];
  s.awaiting[u] = false;
  s.delaying[u] = false;
  if (pc_[p].meds.size() == 1) begin_new_phase(sim, p);
}

void TfInstance::principal_channel_removed(Simulation& sim, NodeId p,
                                           NodeId u) {
  auto& s = pr_[p];
  s.awaiting.erase(u);
  s.delaying.erase(u);
  check_end_phase(sim, p);
}

void TfInstance::principal_on_relayed(Simulation& sim, NodeId p, NodeId u,
                                      const Msg& m) {
  auto& s = pr_[p];
  switch (m.type) {
    case MsgType::TokensPlease: {
      if (s.phase == PhaseType::Center) {
        Msg r;
        r.type = MsgType::NoTransport;
        send_relayed(sim, p, u, r);
      } else if (s.phase == PhaseType::Arm) {
        if (params_.diff_mode && (m.colors & s.color_mask()) != 0) {
          // Same-color requester: tokens only move across colors.
          Msg r;
          r.type = MsgType::NoTransport;
          send_relayed(sim, p, u, r);
          break;
        }
        Msg r;
        r.type = MsgType::Transport;
        r.k = s.tok();
        r.term = s.term;
        r.colors = s.color_mask();
        const std::uint8_t color = s.tok_c[1] > 0 ? 1 : 0;
        r.stamp = trace_->record_send({p, Role::Primary}, u, params_.instance,
                                      color, r.k, r.term);
        send_relayed(sim, p, u, r);
        const std::int64_t before = s.tok();
        s.tok_c[0] = s.tok_c[1] = 0;
        s.term = 0;
        sim.note_tok(p, params_.instance, before, 0);
        // The phase ends abruptly here; responses still owed are dropped
        // along with the channels.
        end_phase_log(sim, p, /*abrupt=*/true);
        s.phase = PhaseType::None;
        chan_non_busy(sim, p);
        if (driver_->app())
          driver_->app()->retired_by_transport(sim, *driver_, p,
                                               params_.instance);
        flush_pending(sim, p);
      }
      break;
    }
    case MsgType::Waiting: {
      if (s.phase == PhaseType::Center) {
        s.delaying[u] = true;
      } else if (s.phase == PhaseType::Arm) {
        Msg r;
        r.type = MsgType::GoOn;
        send_relayed(sim, p, u, r);
      }
      break;
    }
    case MsgType::GoOn:
    case MsgType::NoTransport:
    case MsgType::Transport: {
      if (m.type == MsgType::Transport) {
        const std::uint8_t color = m.colors == 2 ? 1 : 0;
        trace_->record_receive(sim, {p, Role::Primary}, u, params_.instance,
                               color, m.k, m.term, m.stamp);
        gain_tokens(sim, p, m.colors, m.k, m.term);
        if (driver_->app())
          driver_->app()->transport_received(sim, *driver_, p,
                                             params_.instance, m.k, m.term);
      }
      const bool matches =
          (s.phase == PhaseType::Arm && m.type == MsgType::GoOn) ||
          (s.phase == PhaseType::Center && m.type != MsgType::GoOn);
      if (matches) {
        s.awaiting[u] = false;
        check_end_phase(sim, p);
      }
      break;
    }
    default:
      sim.abort_run("unexpected relayed message type");
  }
}

void TfInstance::check_end_phase(Simulation& sim, NodeId p) {
  auto& s = pr_[p];
  if (s.phase == PhaseType::None || !s.all_responses_in()) return;
  if (s.pending() > 0) {
    const std::int64_t before = s.tok();
    sim.note_pending(p, params_.instance, s.pending(), 0);
    s.tok_c[0] += s.pending_c[0];
    s.tok_c[1] += s.pending_c[1];
    s.term += s.pending_term;
    s.pending_c[0] = s.pending_c[1] = 0;
    s.pending_term = 0;
    sim.note_tok(p, params_.instance, before, s.tok());
    chan_tok_increase(sim, p);
  }
  if (can_form(p)) {
    end_phase_log(sim, p, false);
    form_teams(sim, p);
  } else if (pc_[p].meds.empty()) {
    end_phase_log(sim, p, false);
    s.phase = PhaseType::None;
  } else {
    end_phase_log(sim, p, false);
    begin_new_phase(sim, p);
  }
}

void TfInstance::begin_new_phase(Simulation& sim, NodeId p) {
  auto& s = pr_[p];
  assert(s.tok() > 0 && !pc_[p].meds.empty());
  s.phase = driver_->phase_coin_center(sim, p, params_.instance)
                ? PhaseType::Center
                : PhaseType::Arm;
  s.phase_id = ++phase_next_;
  sim.log_event(RecordKind::PhaseBegin, p, Role::Primary, -1, Role::Primary,
                params_.instance, s.phase == PhaseType::Center ? 1 : 0, 0, 0,
                static_cast<std::int64_t>(s.phase_id));
  std::vector<NodeId> meds;
  for (const auto& [u, _] : pc_[p].meds) meds.push_back(u);
  for (NodeId u : meds) {
    Msg m;
    if (s.phase == PhaseType::Center) {
      m.type = MsgType::TokensPlease;
      m.colors = s.color_mask();
    } else {
      m.type = MsgType::Waiting;
      if (s.delaying[u]) {
        Msg g;
        g.type = MsgType::GoOn;
        send_relayed(sim, p, u, g);
      }
    }
    s.delaying[u] = false;
    s.awaiting[u] = true;
    send_relayed(sim, p, u, m);
  }
}

void TfInstance::end_phase_log(Simulation& sim, NodeId p, bool abrupt) {
  auto& s = pr_[p];
  if (s.phase == PhaseType::None) return;
  sim.log_event(RecordKind::PhaseEnd, p, Role::Primary, -1, Role::Primary,
                params_.instance, abrupt ? 1 : 0, 0, 0,
                static_cast<std::int64_t>(s.phase_id));
}

void TfInstance::form_teams(Simulation& sim, NodeId p) {
  auto& s = pr_[p];
  std::int64_t teams, consume0, consume1, team_size;
  if (params_.diff_mode) {
    teams = std::min(s.tok_c[0], s.tok_c[1]);
    consume0 = consume1 = teams;
    team_size = 2;
  } else {
    teams = s.tok() / params_.sigma;
    consume0 = teams * params_.sigma;
    consume1 = 0;
    team_size = params_.sigma;
  }
  assert(teams >= 1);
  auto pick = trace_->pick_team(p, params_.instance, consume0, consume1);

  const std::int64_t rem0 = s.tok_c[0] - consume0;
  const std::int64_t rem1 = s.tok_c[1] - consume1;
  const std::int64_t rem_term = s.term - pick.term;

  const std::uint64_t formation =
      sim.note_team(p, params_.instance, teams, team_size, pick.term,
                    rem0 + rem1);
  s.phase = PhaseType::None;
  const std::int64_t before = s.tok();
  s.tok_c[0] = s.tok_c[1] = 0;
  s.term = 0;
  sim.note_tok(p, params_.instance, before, 0);
  chan_non_busy(sim, p);

  if (driver_->app())
    driver_->app()->team_formed(sim, *driver_, p, params_.instance, teams,
                                pick.term, formation);
  trace_->notify_origins(sim, p, params_.instance, pick, formation);

  if (rem0 > 0)
    sim.schedule_fake_injection(p, params_.instance, rem0,
                                rem1 > 0 ? 0 : rem_term, 1);
  if (rem1 > 0)
    sim.schedule_fake_injection(p, params_.instance, rem1, rem_term, 2);
}

void TfInstance::flush_pending(Simulation& sim, NodeId p) {
  // Tokens buffered during the aborted phase behave as if injected right
  // after it ended: they re-enter through their own injection event, keeping
  // the retirement itself free of token arrivals.
  auto& s = pr_[p];
  if (s.pending() == 0) return;
  assert(pc_[p].meds.empty() && s.phase == PhaseType::None);
  const std::int64_t p0 = s.pending_c[0], p1 = s.pending_c[1];
  const std::int64_t pt = s.pending_term;
  s.pending_c[0] = s.pending_c[1] = 0;
  s.pending_term = 0;
  if (p0 > 0)
    sim.schedule_deferred_injection(p, params_.instance, p0,
                                    p1 > 0 ? 0 : pt, 1);
  if (p1 > 0) sim.schedule_deferred_injection(p, params_.instance, p1, pt, 2);
}

}  // namespace teamform
