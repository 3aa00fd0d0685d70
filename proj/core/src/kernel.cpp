#include "teamform/kernel.hpp"

#include <cassert>
#include <stdexcept>

namespace teamform {

namespace {
std::uint64_t link_key(NodeId src, NodeId dst) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
         static_cast<std::uint32_t>(dst);
}
}  // namespace

Simulation::Simulation(SimOptions opt, std::unique_ptr<Adversary> adversary)
    : opt_(opt),
      adversary_(std::move(adversary)),
      adv_rng_(derive_seed(opt.seed, kStreamAdversary)) {
  if (opt_.n < 2) throw std::invalid_argument("n must be at least 2");
  node_rngs_.reserve(opt_.n);
  for (int i = 0; i < opt_.n; ++i)
    node_rngs_.emplace_back(derive_seed(opt_.seed, kStreamNode, i));
  fragile_.assign(opt_.n, false);
  faulty_.assign(opt_.n, false);
  phys_tok_.assign(opt_.n, 0);
  log_.seed = opt_.seed;
  log_.config_json = opt_.config_json;

  fragile_ids_ = adversary_->choose_fragile(opt_.n, opt_.epsilon, adv_rng_);
  for (NodeId f : fragile_ids_) {
    fragile_[f] = true;
    faulty_[f] = true;
    log_event(RecordKind::Toggle, f, Role::Primary, -1, Role::Primary, 0, 1);
  }
}

Simulation::~Simulation() = default;

std::uint64_t Simulation::next_chained_seq() {
  if (chain_tick_ != now_.ticks) {
    chain_tick_ = now_.ticks;
    chain_seq_ = now_.seq;
  }
  ++chain_seq_;
  // Chained events must stay below the next strided slot.
  assert(chain_seq_ % kSeqStride != 0);
  return chain_seq_;
}

void Simulation::log_event(RecordKind kind, NodeId node, Role role,
                           NodeId peer, Role peer_role, Instance instance,
                           std::int64_t a, std::int64_t b, std::int64_t c,
                           std::int64_t d) {
  LogRecord r;
  r.t = now_.ticks;
  r.seq = log_.records.size();
  r.kind = kind;
  r.node = node;
  r.role = role;
  r.peer = peer;
  r.peer_role = peer_role;
  r.instance = instance;
  r.a = a;
  r.b = b;
  r.c = c;
  r.d = d;
  log_.records.push_back(r);
}

void Simulation::schedule_start(NodeId node, Tick at) {
  Event e;
  e.at = {at, next_strided_seq()};
  e.kind = Event::Start;
  e.node = node;
  queue_.push(e);
}

void Simulation::schedule_injection(const InjectionEvent& inj) {
  Event e;
  e.at = {inj.t, next_strided_seq()};
  e.kind = Event::Inject;
  e.node = inj.node;
  e.payload.count = inj.count;
  e.payload.term = inj.term;
  e.payload.colors = inj.colors;
  e.payload.instance = inj.instance;
  queue_.push(e);
}

void Simulation::schedule_injection_plan() {
  for (const auto& inj : adversary_->injection_plan()) schedule_injection(inj);
}

Tick Simulation::link_floor(NodeId src, NodeId dst) const {
  auto it = link_last_.find(link_key(src, dst));
  return it == link_last_.end() ? 0 : it->second;
}

void Simulation::send(VAddr src, VAddr dst, Instance instance, Msg msg) {
  if (faulty_[src.node]) {
    abort_run("send attempted by a faulty node " + vaddr_string(src));
    return;
  }
  DelayQuery q;
  q.src = src;
  q.dst = dst;
  q.now = now_.ticks;
  q.src_busy = phys_tok_[src.node] > 0;
  q.dst_busy = phys_tok_[dst.node] > 0;
  q.msg = msg.type;
  const Tick delay = adversary_->delay(q, adv_rng_);
  if (delay <= 0 || delay > kTicksPerUnit) {
    abort_run("adversary produced a delay outside (0,1]");
    return;
  }
  // FIFO floor: a later send on the same physical link never undercuts the
  // previous delivery. Ties resolve by the fresh sequence number, which is an
  // infinitesimal step past the floor.
  Tick deliver_ticks = now_.ticks + delay;
  auto& floor = link_last_[link_key(src.node, dst.node)];
  if (deliver_ticks < floor) deliver_ticks = floor;
  floor = deliver_ticks;

  Envelope env;
  env.id = ++envelope_next_;
  env.src = src;
  env.dst = dst;
  env.instance = instance;
  env.msg = std::move(msg);
  env.sent = now_.ticks;
  env.deliver = {deliver_ticks, next_strided_seq()};

  const std::int64_t carried = env.msg.tokens_carried();
  transit_tok_ += carried;

  LogRecord r;
  r.t = now_.ticks;
  r.seq = log_.records.size();
  r.kind = RecordKind::Send;
  r.node = src.node;
  r.role = src.role;
  r.peer = dst.node;
  r.peer_role = dst.role;
  r.instance = instance;
  r.has_msg = true;
  r.msg = env.msg.type;
  r.a = env.msg.k;
  r.b = env.msg.term;
  r.c = env.msg.type == MsgType::Channel || env.msg.type == MsgType::NoChannel
            ? static_cast<std::int64_t>(env.msg.epoch)
            : static_cast<std::int64_t>(env.msg.stamp);
  r.d = static_cast<std::int64_t>(env.id);
  log_.records.push_back(r);

  Event e;
  e.at = env.deliver;
  e.kind = Event::Deliver;
  e.node = dst.node;
  e.envelope = env.id;
  in_flight_.emplace(env.id, std::move(env));
  ++deliveries_pending_;
  queue_.push(e);
}

void Simulation::schedule_fake_injection(NodeId node, Instance instance,
                                         std::int64_t count, std::int64_t term,
                                         std::uint8_t colors) {
  Event e;
  e.at = {now_.ticks, next_chained_seq()};
  e.kind = Event::FakeInject;
  e.node = node;
  e.payload = {count, term, colors, instance, true};
  fake_pending_ += count;
  queue_.push(e);
}

void Simulation::schedule_app_injection(NodeId node, Instance instance,
                                        std::int64_t count, std::int64_t term,
                                        std::uint8_t colors) {
  Event e;
  e.at = {now_.ticks, next_chained_seq()};
  e.kind = Event::Inject;
  e.node = node;
  e.payload = {count, term, colors, instance, false};
  queue_.push(e);
}

void Simulation::schedule_deferred_injection(NodeId node, Instance instance,
                                             std::int64_t count,
                                             std::int64_t term,
                                             std::uint8_t colors) {
  Event e;
  e.at = {now_.ticks, next_chained_seq()};
  e.kind = Event::FakeInject;
  e.node = node;
  e.payload = {count, term, colors, instance, true};
  // the tokens move from the pending buffer into the scheduled parcel;
  // observers treat them as pending until the parcel lands
  pending_buf_ -= count;
  fake_pending_ += count;
  queue_.push(e);
}

void Simulation::note_tok(NodeId node, Instance instance, std::int64_t before,
                          std::int64_t after) {
  held_tok_ += after - before;
  phys_tok_[node] += after - before;
  log_event(RecordKind::TokChange, node, Role::Primary, -1, Role::Primary,
            instance, before, after);
}

void Simulation::note_pending(NodeId node, Instance instance,
                              std::int64_t before, std::int64_t after) {
  pending_buf_ += after - before;
  phys_tok_[node] += after - before;
  log_event(RecordKind::PendingChange, node, Role::Primary, -1, Role::Primary,
            instance, before, after);
}

std::uint64_t Simulation::note_team(NodeId node, Instance instance,
                                    std::int64_t teams, std::int64_t team_size,
                                    std::int64_t term_consumed,
                                    std::int64_t remainder) {
  ledger_.deleted += teams * team_size;
  const std::uint64_t id = ++formation_next_;
  log_event(RecordKind::TeamForm, node, Role::Primary, -1, Role::Primary,
            instance, teams, remainder, term_consumed,
            static_cast<std::int64_t>(id));
  return id;
}

void Simulation::note_screened(VAddr at, VAddr from, Instance instance,
                               std::int64_t tokens_lost) {
  ledger_.limbo += tokens_lost;
  log_event(RecordKind::Screened, at.node, at.role, from.node, from.role,
            instance, tokens_lost);
}

void Simulation::abort_run(const std::string& reason) {
  aborted_ = true;
  if (abort_reason_.empty()) abort_reason_ = reason;
}

bool Simulation::toggle_status(NodeId node, Tick at, std::string* error) {
  if (!fragile_[node]) {
    if (error) *error = "toggle of a non-fragile node";
    return false;
  }
  if (!is_quiescent()) {
    if (error) *error = "toggle at a non-quiescent time";
    return false;
  }
  faulty_[node] = !faulty_[node];
  SimTime saved = now_;
  now_.ticks = at;
  log_event(RecordKind::Toggle, node, Role::Primary, -1, Role::Primary, 0,
            faulty_[node] ? 1 : 0);
  now_ = saved;
  return true;
}

void Simulation::process_gap(Tick lo, Tick hi) {
  if (!is_quiescent()) return;
  ToggleDecision d =
      adversary_->toggles(lo, hi, fragile_, faulty_, adv_rng_);
  if (d.nodes.empty()) return;
  if (d.at <= lo || d.at >= hi) d.at = lo + std::max<Tick>(1, (hi - lo) / 2);
  for (NodeId v : d.nodes) {
    std::string err;
    if (!toggle_status(v, d.at, &err)) {
      abort_run("adversary toggle rejected: " + err);
      return;
    }
  }
}

void Simulation::dispatch(const Event& e) {
  now_ = e.at;
  switch (e.kind) {
    case Event::Deliver: {
      auto it = in_flight_.find(e.envelope);
      assert(it != in_flight_.end());
      Envelope env = std::move(it->second);
      in_flight_.erase(it);
      --deliveries_pending_;
      const std::int64_t carried = env.msg.tokens_carried();
      transit_tok_ -= carried;

      LogRecord r;
      r.t = now_.ticks;
      r.seq = log_.records.size();
      r.node = env.dst.node;
      r.role = env.dst.role;
      r.peer = env.src.node;
      r.peer_role = env.src.role;
      r.instance = env.instance;
      r.has_msg = true;
      r.msg = env.msg.type;
      r.a = env.msg.k;
      r.b = env.msg.term;
      r.c = env.msg.type == MsgType::Channel ||
                    env.msg.type == MsgType::NoChannel
                ? static_cast<std::int64_t>(env.msg.epoch)
                : static_cast<std::int64_t>(env.msg.stamp);
      r.d = static_cast<std::int64_t>(env.id);
      if (faulty_[env.dst.node]) {
        r.kind = RecordKind::DropFaulty;
        log_.records.push_back(r);
        ledger_.limbo += carried;
        return;
      }
      r.kind = RecordKind::Deliver;
      log_.records.push_back(r);
      protocol_->on_deliver(*this, env);
      break;
    }
    case Event::Inject: {
      NodeId target = e.node;
      if (target < 0) {
        target = adversary_->resolve_any(now_.ticks, faulty_, adv_rng_);
        if (target < 0) {
          abort_run("injection with no non-faulty node available");
          return;
        }
      }
      if (faulty_[target]) {
        abort_run("adversary injected into a faulty node");
        return;
      }
      ledger_.injected += e.payload.count;
      log_event(RecordKind::Inject, target, Role::Primary, -1, Role::Primary,
                e.payload.instance, e.payload.count, e.payload.term,
                e.payload.colors);
      protocol_->on_inject(*this, target, e.payload);
      break;
    }
    case Event::FakeInject: {
      fake_pending_ -= e.payload.count;
      // Deferred phase-buffer parcels carry no fresh-injection bookkeeping;
      // remainder fakes do. Both re-enter through the same handler.
      if (!e.payload.deferred) ledger_.injected_fake += e.payload.count;
      log_event(RecordKind::FakeInject, e.node, Role::Primary, -1,
                Role::Primary, e.payload.instance, e.payload.count,
                e.payload.term, e.payload.colors,
                e.payload.deferred ? 1 : 0);
      protocol_->on_inject(*this, e.node, e.payload);
      break;
    }
    case Event::Start: {
      if (faulty_[e.node]) return;  // faulty nodes do not wake up
      log_event(RecordKind::Start, e.node, Role::Primary, -1, Role::Primary,
                0);
      protocol_->on_start(*this, e.node);
      break;
    }
  }
}

bool Simulation::step() {
  if (queue_.empty() || aborted_) return false;
  Event e = queue_.top();
  if (opt_.max_time > 0 && e.at.ticks > opt_.max_time) {
    censored_ = true;
    return false;
  }
  if (e.at.ticks > last_event_ticks_)
    process_gap(last_event_ticks_, e.at.ticks);
  if (aborted_) return false;
  // Toggles may not reorder the queue, pop the same event.
  queue_.pop();
  dispatch(e);
  last_event_ticks_ = e.at.ticks;
  if (!aborted_ && !ledger().balanced())
    abort_run("token conservation audit failed");
  return !aborted_;
}

bool Simulation::run() {
  while (!queue_.empty() && !aborted_) {
    if (!step()) break;
  }
  settled_ = queue_.empty() && !aborted_;
  return !aborted_;
}

}  // namespace teamform
