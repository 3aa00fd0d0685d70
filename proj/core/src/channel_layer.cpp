#include <cassert>

#include "teamform/tf_machine.hpp"

namespace teamform {

namespace {
Msg control(MsgType t) {
  Msg m;
  m.type = t;
  return m;
}
}  // namespace

// -- primary side -------------------------------------------------------------

void TfInstance::chan_busy_broadcast(Simulation& sim, NodeId p) {
  for (NodeId u : graph_->utilities_of(p))
    sim.send({p, Role::Primary}, {u, Role::Utility}, params_.instance,
             control(MsgType::Busy));
}

void TfInstance::chan_tok_increase(Simulation& sim, NodeId p) {
  Msg m = control(MsgType::TokensUpdate);
  m.k = pr_[p].tok();
  m.colors = pr_[p].color_mask();
  for (NodeId u : pc_[p].busy_acked)
    sim.send({p, Role::Primary}, {u, Role::Utility}, params_.instance, m);
}

void TfInstance::chan_non_busy(Simulation& sim, NodeId p) {
  auto& ch = pc_[p];
  for (NodeId u : ch.busy_acked)
    if (!ch.meds.count(u))
      sim.send({p, Role::Primary}, {u, Role::Utility}, params_.instance,
               control(MsgType::NotBusy));
  ch.busy_acked.clear();
  for (const auto& [u, _] : ch.meds) ch.busy_acked.insert(u);

  // Mediators get their NotBusy one by one, each paired with the channel
  // removal notification to the principal layer.
  std::vector<std::pair<NodeId, std::uint64_t>> meds(ch.meds.begin(),
                                                     ch.meds.end());
  for (auto [u, epoch] : meds) {
    ch.meds.erase(u);
    sim.send({p, Role::Primary}, {u, Role::Utility}, params_.instance,
             control(MsgType::NotBusy));
    ch.busy_acked.erase(u);
    sim.log_event(RecordKind::MedsRemove, p, Role::Primary, u, Role::Utility,
                  params_.instance, 0, 0, static_cast<std::int64_t>(epoch));
    principal_channel_removed(sim, p, u);
  }
}

void TfInstance::chan_on_busy_ack(Simulation& sim, NodeId p, NodeId u) {
  if (pr_[p].tok() > 0) {
    pc_[p].busy_acked.insert(u);
    Msg m = control(MsgType::TokensUpdate);
    m.k = pr_[p].tok();
    m.colors = pr_[p].color_mask();
    sim.send({p, Role::Primary}, {u, Role::Utility}, params_.instance, m);
  } else {
    sim.send({p, Role::Primary}, {u, Role::Utility}, params_.instance,
             control(MsgType::NotBusy));
  }
}

void TfInstance::chan_on_channel(Simulation& sim, NodeId p, NodeId u,
                                 std::uint64_t epoch) {
  // ChannelAck goes out unconditionally, even from a non-busy node.
  if (driver_->faults().drop_channel_ack_at != p)
    sim.send({p, Role::Primary}, {u, Role::Utility}, params_.instance,
             control(MsgType::ChannelAck));
  if (pr_[p].tok() > 0 && pc_[p].busy_acked.count(u)) {
    pc_[p].meds[u] = epoch;
    sim.log_event(RecordKind::MedsAdd, p, Role::Primary, u, Role::Utility,
                  params_.instance, 0, 0, static_cast<std::int64_t>(epoch));
    principal_channel_added(sim, p, u);
  }
}

void TfInstance::chan_on_no_channel(Simulation& sim, NodeId p, NodeId u,
                                    std::uint64_t epoch) {
  auto it = pc_[p].meds.find(u);
  if (it == pc_[p].meds.end()) return;  // stale, the channel was never ours
  pc_[p].meds.erase(it);
  sim.log_event(RecordKind::MedsRemove, p, Role::Primary, u, Role::Utility,
                params_.instance, 0, 0, static_cast<std::int64_t>(epoch));
  principal_channel_removed(sim, p, u);
}

void TfInstance::chan_on_relayed(Simulation& sim, NodeId p, NodeId u,
                                 const Msg& m) {
  if (!pc_[p].meds.count(u)) {
    sim.note_screened({p, Role::Primary}, {u, Role::Utility}, params_.instance,
                      m.tokens_carried());
    return;
  }
  principal_on_relayed(sim, p, u, m);
}

// -- utility side ---------------------------------------------------------------

void TfInstance::util_on_busy(Simulation& sim, NodeId u, NodeId p) {
  auto& st = uc_[u];
  if (st.busy_toks.count(p)) return;  // already known busy
  st.busy_toks[p] = {0, 0, ++upd_next_};
  sim.send({u, Role::Utility}, {p, Role::Primary}, params_.instance,
           control(MsgType::BusyAck));
}

void TfInstance::util_on_tokens_update(Simulation& sim, NodeId u, NodeId p,
                                       const Msg& m) {
  uc_[u].busy_toks[p] = {m.k, m.colors, ++upd_next_};
  util_create_channel(sim, u);
}

void TfInstance::util_on_not_busy(Simulation& sim, NodeId u, NodeId p) {
  auto& st = uc_[u];
  st.busy_toks.erase(p);
  if (st.in_chan(p)) {
    NodeId peer = st.chan_peer(p);
    Msg nc = control(MsgType::NoChannel);
    nc.epoch = st.chan_epoch;
    sim.send({u, Role::Utility}, {peer, Role::Primary}, params_.instance, nc);
    sim.log_event(RecordKind::ChanRelease, u, Role::Utility, -1, Role::Primary,
                  params_.instance, st.chan[0], st.chan[1],
                  static_cast<std::int64_t>(st.chan_epoch), p);
    st.chan[0] = st.chan[1] = -1;
    util_create_channel(sim, u);
  }
}

void TfInstance::util_on_channel_ack(Simulation& sim, NodeId u, NodeId p) {
  auto& st = uc_[u];
  auto it = st.diff.find(p);
  if (it == st.diff.end()) {
    sim.abort_run("ChannelAck without a matching Channel");
    return;
  }
  if (--it->second == 0) st.diff.erase(it);
}

void TfInstance::util_on_relayed(Simulation& sim, NodeId u, NodeId p,
                                 const Msg& m) {
  auto& st = uc_[u];
  if (!st.in_chan(p) || st.diff_of(p) != 0) {
    sim.note_screened({u, Role::Utility}, {p, Role::Primary}, params_.instance,
                      m.tokens_carried());
    return;
  }
  NodeId peer = st.chan_peer(p);
  Msg out = m;
  if (m.type == MsgType::Transport) {
    // Tokens pass through the mediator instantaneously; restamp for the
    // second hop.
    std::uint8_t color = m.colors == 2 ? 1 : 0;
    trace_->record_receive(sim, {u, Role::Utility}, p, params_.instance, color,
                           m.k, m.term, m.stamp);
    out.stamp = trace_->record_send({u, Role::Utility}, peer, params_.instance,
                                    color, m.k, m.term);
  }
  sim.send({u, Role::Utility}, {peer, Role::Primary}, params_.instance, out);
}

void TfInstance::util_create_channel(Simulation& sim, NodeId u) {
  auto& st = uc_[u];
  if (st.has_chan()) return;

  // argmax by token count, first-come-first-served among ties.
  auto better = [](const UtilityChannelState::BusyEntry& a,
                   const UtilityChannelState::BusyEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.upd < b.upd;
  };
  NodeId p1 = -1, p2 = -1;
  if (!params_.diff_mode) {
    const UtilityChannelState::BusyEntry* e1 = nullptr;
    const UtilityChannelState::BusyEntry* e2 = nullptr;
    for (const auto& [p, e] : st.busy_toks) {
      if (e.count <= 0) continue;
      if (!e1 || better(e, *e1)) {
        p2 = p1, e2 = e1;
        p1 = p, e1 = &e;
      } else if (!e2 || better(e, *e2)) {
        p2 = p, e2 = &e;
      }
    }
  } else {
    // Pairing variant: one endpoint per color, so a channel can always move
    // tokens toward a cross-color pair.
    const UtilityChannelState::BusyEntry* e1 = nullptr;
    const UtilityChannelState::BusyEntry* e2 = nullptr;
    for (const auto& [p, e] : st.busy_toks) {
      if (e.count <= 0) continue;
      if (e.colors & 1) {
        if (!e1 || better(e, *e1)) p1 = p, e1 = &e;
      } else if (e.colors & 2) {
        if (!e2 || better(e, *e2)) p2 = p, e2 = &e;
      }
    }
  }
  if (p1 < 0 || p2 < 0) return;

  st.chan[0] = std::min(p1, p2);
  st.chan[1] = std::max(p1, p2);
  st.chan_epoch = ++epoch_next_;
  sim.log_event(RecordKind::ChanCreate, u, Role::Utility, -1, Role::Primary,
                params_.instance, st.chan[0], st.chan[1],
                static_cast<std::int64_t>(st.chan_epoch));
  for (NodeId p : {p1, p2}) {
    Msg c = control(MsgType::Channel);
    c.epoch = st.chan_epoch;
    sim.send({u, Role::Utility}, {p, Role::Primary}, params_.instance, c);
    ++st.diff[p];
  }
}

}  // namespace teamform
