#include "teamform/trace_tree.hpp"

#include <cassert>

#include "teamform/tf_machine.hpp"

namespace teamform {

namespace {
std::uint32_t fifo_key(Role role, Instance inst, std::uint8_t color) {
  return (static_cast<std::uint32_t>(inst) << 2) |
         (role == Role::Utility ? 2u : 0u) | color;
}
}  // namespace

TraceTree::TraceTree(int n, bool reports_enabled)
    : n_(n), reports_enabled_(reports_enabled) {
  ports_.resize(n);
  held_.resize(n);
  fwd_.resize(n);
}

const TraceTree::PortCounters& TraceTree::port(NodeId node,
                                               NodeId peer) const {
  static const PortCounters zero;
  auto it = ports_[node].find(peer);
  return it == ports_[node].end() ? zero : it->second;
}

std::uint32_t TraceTree::alloc_record() {
  ++live_records_;
  if (!free_.empty()) {
    std::uint32_t id = free_.back();
    free_.pop_back();
    records_[id] = Record{};
    return id;
  }
  records_.emplace_back();
  return static_cast<std::uint32_t>(records_.size() - 1);
}

void TraceTree::free_record(std::uint32_t id) {
  --live_records_;
  free_.push_back(id);
}

std::deque<std::uint32_t>& TraceTree::held_fifo(VAddr holder, Instance inst,
                                                std::uint8_t color) {
  return held_[holder.node][fifo_key(holder.role, inst, color)];
}

std::int64_t TraceTree::held_count(NodeId node, Instance inst,
                                   std::uint8_t color) const {
  auto it = held_[node].find(fifo_key(Role::Primary, inst, color));
  return it == held_[node].end()
             ? 0
             : static_cast<std::int64_t>(it->second.size());
}

std::int64_t TraceTree::held_term(NodeId node, Instance inst) const {
  std::int64_t t = 0;
  for (std::uint8_t color = 0; color < 2; ++color) {
    auto it = held_[node].find(fifo_key(Role::Primary, inst, color));
    if (it == held_[node].end()) continue;
    for (std::uint32_t id : it->second)
      if (records_[id].term) ++t;
  }
  return t;
}

void TraceTree::add_origins(NodeId node, Instance inst, std::uint8_t color,
                            std::int64_t count, std::int64_t term) {
  auto& fifo = held_fifo({node, Role::Primary}, inst, color);
  for (std::int64_t i = 0; i < count; ++i) {
    std::uint32_t id = alloc_record();
    auto& r = records_[id];
    r.instance = inst;
    r.color = color;
    r.origin = true;
    r.held = true;
    r.term = i >= count - term;  // TERM-marked tail of the batch
    fifo.push_back(id);
  }
}

std::uint64_t TraceTree::record_send(VAddr holder, NodeId peer, Instance inst,
                                     std::uint8_t color, std::int64_t count,
                                     std::int64_t term) {
  const NodeId node = holder.node;
  auto& fifo = held_fifo(holder, inst, color);
  assert(static_cast<std::int64_t>(fifo.size()) == count &&
         "transports always carry the sender's full holding");
  auto& ctr = ports_[node][peer];
  const std::uint64_t stamp = ctr.outgoing;
  std::int64_t term_seen = 0;
  for (std::int64_t i = 0; i < count; ++i) {
    std::uint32_t id = fifo.front();
    fifo.pop_front();
    auto& r = records_[id];
    r.held = false;
    r.out_peer = peer;
    r.out_counter = ctr.outgoing++;
    if (r.term) ++term_seen;
    fwd_[node][{peer, r.out_counter}] = id;
  }
  assert(term_seen == term);
  (void)term;
  (void)term_seen;
  return stamp;
}

void TraceTree::record_receive(Simulation& sim, VAddr holder, NodeId peer,
                               Instance inst, std::uint8_t color,
                               std::int64_t count, std::int64_t term,
                               std::uint64_t stamp) {
  const NodeId node = holder.node;
  auto& ctr = ports_[node][peer];
  if (stamp != ctr.incoming) {
    sim.abort_run("trace counter stamp mismatch: port bookkeeping corrupted");
    return;
  }
  auto& fifo = held_fifo(holder, inst, color);
  for (std::int64_t i = 0; i < count; ++i) {
    std::uint32_t id = alloc_record();
    auto& r = records_[id];
    r.instance = inst;
    r.color = color;
    r.held = true;
    r.in_peer = peer;
    r.in_counter = ctr.incoming++;
    r.term = i >= count - term;
    fifo.push_back(id);
  }
}

TraceTree::TeamPick TraceTree::pick_team(NodeId node, Instance inst,
                                         std::int64_t count_c0,
                                         std::int64_t count_c1) {
  TeamPick pick;
  const std::int64_t want[2] = {count_c0, count_c1};
  for (std::uint8_t color = 0; color < 2; ++color) {
    if (want[color] == 0) continue;
    auto& fifo = held_fifo({node, Role::Primary}, inst, color);
    assert(static_cast<std::int64_t>(fifo.size()) >= want[color]);
    for (std::int64_t i = 0; i < want[color]; ++i) {
      std::uint32_t id = fifo.front();
      fifo.pop_front();
      if (records_[id].term) ++pick.term;
      pick.members.push_back(id);
    }
  }
  return pick;
}

void TraceTree::notify_origins(Simulation& sim, NodeId former, Instance inst,
                               const TeamPick& team,
                               std::uint64_t formation_id) {
  if (!reports_enabled_) {
    for (std::uint32_t id : team.members) free_record(id);
    return;
  }
  std::map<NodeId, std::vector<std::uint64_t>> per_pred;
  std::int64_t origin_here = 0;
  for (std::uint32_t id : team.members) {
    const auto& r = records_[id];
    if (r.origin)
      ++origin_here;
    else
      per_pred[r.in_peer].push_back(r.in_counter);
    free_record(id);
  }
  if (origin_here > 0) {
    sim.log_event(RecordKind::OriginNotify, former, Role::Primary, -1,
                  Role::Primary, inst, origin_here, 0, 0,
                  static_cast<std::int64_t>(formation_id));
    if (driver_ && driver_->app())
      driver_->app()->origin_notified(sim, *driver_, former, inst,
                                      formation_id, origin_here);
  }
  for (auto& [pred, counters] : per_pred) {
    Msg m;
    m.type = MsgType::TraceReport;
    m.formation_id = formation_id;
    m.k = static_cast<std::int64_t>(counters.size());
    m.counters = std::move(counters);
    sim.send({former, Role::Primary}, {pred, Role::Primary}, inst, m);
  }
}

void TraceTree::on_report(Simulation& sim, const Envelope& env) {
  const NodeId node = env.dst.node;
  const NodeId from = env.src.node;
  std::map<NodeId, std::vector<std::uint64_t>> per_pred;
  std::int64_t origin_here = 0;
  for (std::uint64_t counter : env.msg.counters) {
    auto it = fwd_[node].find({from, counter});
    if (it == fwd_[node].end()) {
      sim.abort_run("formation report matches no trace record");
      return;
    }
    const Record& r = records_[it->second];
    if (r.origin)
      ++origin_here;
    else
      per_pred[r.in_peer].push_back(r.in_counter);
    free_record(it->second);
    fwd_[node].erase(it);
  }
  if (origin_here > 0) {
    sim.log_event(RecordKind::OriginNotify, node, Role::Primary, -1,
                  Role::Primary, env.instance, origin_here, 0, 0,
                  static_cast<std::int64_t>(env.msg.formation_id));
    if (driver_ && driver_->app())
      driver_->app()->origin_notified(sim, *driver_, node, env.instance,
                                      env.msg.formation_id, origin_here);
  }
  for (auto& [pred, counters] : per_pred) {
    Msg m;
    m.type = MsgType::TraceReport;
    m.formation_id = env.msg.formation_id;
    m.k = static_cast<std::int64_t>(counters.size());
    m.counters = std::move(counters);
    sim.send({node, Role::Primary}, {pred, Role::Primary}, env.instance, m);
  }
}

}  // namespace teamform
