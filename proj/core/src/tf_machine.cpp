#include "teamform/tf_machine.hpp"

#include <cassert>

namespace teamform {

TfInstance::TfInstance(TfParams params, const PuGraph* graph, TraceTree* trace,
                       TfDriver* driver)
    : params_(params), graph_(graph), trace_(trace), driver_(driver) {
  const int n = graph->n();
  pr_.resize(n);
  pc_.resize(n);
  uc_.resize(n);
}

void TfInstance::handle_delivery(Simulation& sim, const Envelope& env) {
  const Msg& m = env.msg;
  if (env.dst.role == Role::Primary) {
    const NodeId p = env.dst.node;
    const NodeId u = env.src.node;
    switch (m.type) {
      case MsgType::BusyAck: chan_on_busy_ack(sim, p, u); break;
      case MsgType::Channel: chan_on_channel(sim, p, u, m.epoch); break;
      case MsgType::NoChannel: chan_on_no_channel(sim, p, u, m.epoch); break;
      default:
        if (is_principal(m.type)) {
          chan_on_relayed(sim, p, u, m);
        } else {
          sim.abort_run("unexpected message at a primary node");
        }
    }
  } else {
    const NodeId u = env.dst.node;
    const NodeId p = env.src.node;
    switch (m.type) {
      case MsgType::Busy: util_on_busy(sim, u, p); break;
      case MsgType::TokensUpdate: util_on_tokens_update(sim, u, p, m); break;
      case MsgType::NotBusy: util_on_not_busy(sim, u, p); break;
      case MsgType::ChannelAck: util_on_channel_ack(sim, u, p); break;
      default:
        if (is_principal(m.type)) {
          util_on_relayed(sim, u, p, m);
        } else {
          sim.abort_run("unexpected message at a utility node");
        }
    }
  }
}

bool TfInstance::node_state_is_initial(NodeId v) const {
  const auto& s = pr_[v];
  const auto& c = pc_[v];
  const auto& u = uc_[v];
  return s.tok() == 0 && s.term == 0 && s.phase == PhaseType::None &&
         s.awaiting.empty() && s.delaying.empty() && s.pending() == 0 &&
         s.pending_term == 0 && c.busy_acked.empty() && c.meds.empty() &&
         u.busy_toks.empty() && !u.has_chan() && u.diff.empty();
}

TfDriver::TfDriver(const PuGraph* graph, std::vector<TfParams> instances,
                   TfApp* app, bool trace_reports)
    : graph_(graph), trace_(graph->n(), trace_reports), app_(app) {
  trace_.set_driver(this);
  for (const auto& params : instances)
    instances_.push_back(
        std::make_unique<TfInstance>(params, graph, &trace_, this));
}

void TfDriver::on_start(Simulation& sim, NodeId node) {
  if (app_) app_->on_node_start(sim, *this, node);
}

void TfDriver::on_inject(Simulation& sim, NodeId node, const InjectPayload& p) {
  assert(p.instance < instances_.size());
  instances_[p.instance]->handle_injection(sim, node, p);
}

void TfDriver::on_deliver(Simulation& sim, const Envelope& env) {
  if (env.msg.type == MsgType::TraceReport) {
    trace_.on_report(sim, env);
    return;
  }
  if (env.msg.type == MsgType::LeaderAnnounce) {
    if (app_) app_->extra_delivery(sim, *this, env);
    return;
  }
  assert(env.instance < instances_.size());
  instances_[env.instance]->handle_delivery(sim, env);
}

bool TfDriver::all_nodes_initial() const {
  for (NodeId v = 0; v < graph_->n(); ++v)
    for (const auto& inst : instances_)
      if (!inst->node_state_is_initial(v)) return false;
  return true;
}

}  // namespace teamform
