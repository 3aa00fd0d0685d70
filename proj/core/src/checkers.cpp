#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "teamform/checkers.hpp"

namespace teamform {

namespace {

constexpr Tick kUnit = kTicksPerUnit;

bool is_boundary(RecordKind k) {
  switch (k) {
    case RecordKind::Deliver:
    case RecordKind::DropFaulty:
    case RecordKind::Inject:
    case RecordKind::FakeInject:
    case RecordKind::Start:
    case RecordKind::Toggle:
      return true;
    default:
      return false;
  }
}

struct Interval {
  Tick lo = 0, hi = 0;  // [lo, hi); hi == -1 means open until run end
};

std::int64_t team_size_of(const CheckContext& ctx, Instance inst) {
  if (inst >= ctx.instances.size()) return 2;
  const auto& p = ctx.instances[inst];
  return p.diff_mode ? 2 : p.sigma;
}

struct EpochInfo {
  NodeId u = -1, p1 = -1, p2 = -1;
  Instance inst = 0;
  Tick create = -1;
  Tick add[2] = {-1, -1};
  Tick rem[2] = {-1, -1};
  std::uint64_t rem_seq[2] = {0, 0};
  int rem_activation[2] = {-1, -1};

  int side(NodeId p) const { return p == p1 ? 0 : 1; }
  bool operational() const { return add[0] >= 0 && add[1] >= 0; }
  Tick op_start() const { return std::max(add[0], add[1]); }
  bool released() const { return rem[0] >= 0 && rem[1] >= 0; }
  Tick first_rem() const {
    if (rem[0] < 0) return rem[1];
    if (rem[1] < 0) return rem[0];
    return std::min(rem[0], rem[1]);
  }
};

// One reconstructed in-flight relayed message (one mediator hop pair).
struct RelayFlight {
  Instance inst = 0;
  MsgType type = MsgType::GoOn;
  NodeId sender = -1, mediator = -1, peer = -1;
  std::uint64_t epoch = 0;
  Tick sent = -1;          // principal-layer send time (first hop)
  Tick delivered = -1;     // final delivery time at the peer, -1 if never
  bool screened = false;   // screened at the mediator or the peer
  std::int64_t tokens = 0;
};

struct Sweep {
  const ExecutionLog& log;
  const CheckContext& ctx;
  std::vector<Violation> out;
  std::uint64_t cur = 0;

  void flag(const std::string& check, const std::string& detail) {
    out.push_back({check, cur, detail});
  }
};

}  // namespace

std::string describe(const std::vector<Violation>& vs, std::size_t limit) {
  std::ostringstream os;
  for (std::size_t i = 0; i < vs.size() && i < limit; ++i)
    os << "[" << vs[i].check << "] @" << vs[i].seq << ": " << vs[i].detail
       << "\n";
  if (vs.size() > limit)
    os << "... and " << (vs.size() - limit) << " more\n";
  return os.str();
}

std::vector<Violation> check_invariants(const ExecutionLog& log,
                                        const CheckContext& ctx) {
  Sweep sw{log, ctx, {}, 0};
  const std::size_t ninst = ctx.instances.size();

  // --- reconstruction state ---------------------------------------------
  std::vector<bool> faulty(ctx.n, false);
  // physical FIFO queues and send ticks per envelope
  std::map<std::uint64_t, std::deque<std::int64_t>> link_queue;
  std::map<std::int64_t, Tick> send_tick;
  std::map<std::int64_t, const LogRecord*> send_rec;
  // token accounting
  std::vector<std::vector<std::int64_t>> tok(
      ninst, std::vector<std::int64_t>(ctx.n, 0));
  std::int64_t injected = 0, deleted = 0, held = 0, fake_pending = 0,
               in_transit = 0, limbo = 0, pending_buf = 0;
  std::int64_t transit_count = 0;  // envelopes in flight
  // busy intervals per (instance, node)
  std::vector<std::vector<std::vector<Interval>>> busy(
      ninst, std::vector<std::vector<Interval>>(ctx.n));
  // meds (with epoch) per (instance, node): u -> epoch
  std::vector<std::vector<std::map<NodeId, std::uint64_t>>> meds(
      ninst, std::vector<std::map<NodeId, std::uint64_t>>(ctx.n));
  // channel epochs
  std::map<std::pair<Instance, std::uint64_t>, EpochInfo> epochs;
  // diff counters per (instance, u, p)
  std::map<std::tuple<Instance, NodeId, NodeId>, std::int64_t> diff;
  // phases
  struct OpenPhase {
    Tick begin = 0;
    bool center = false;
  };
  std::map<std::tuple<Instance, NodeId, std::int64_t>, OpenPhase> open_phases;
  // relayed-message flights: hop1 envelope id -> flight; hop2 id -> hop1 id
  std::map<std::int64_t, RelayFlight> flights;
  std::map<std::int64_t, std::int64_t> hop2_to_flight;
  // per activation: deliveries seen, to pair mediator relays and screens
  int activation = -1;
  std::vector<int> record_activation(log.records.size(), -1);
  std::optional<LogRecord> last_delivery;  // within current activation
  std::int64_t last_delivery_flight = -1;
  // trace accounting
  std::int64_t trace_forwarded = 0, trace_reported = 0;
  // per (inst, node): tok change history (record seq, new value)
  std::vector<std::vector<std::vector<std::pair<std::uint64_t, std::int64_t>>>>
      tok_hist(ninst,
               std::vector<std::vector<std::pair<std::uint64_t, std::int64_t>>>(
                   ctx.n));

  auto quiescent_now = [&] {
    return transit_count == 0 && held == 0 && fake_pending == 0 &&
           pending_buf == 0;
  };

  auto link_key = [](NodeId a, NodeId b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };

  auto check_quiescent_state = [&](std::uint64_t seq) {
    sw.cur = seq;
    for (const auto& [k, v] : diff)
      if (v != 0)
        sw.flag("diff_quiescence",
                "pending ChannelAck balance " + std::to_string(v) +
                    " at a quiescent time");
    if (!open_phases.empty())
      sw.flag("forgetful_state", "a phase is open at a quiescent time");
    for (std::size_t i = 0; i < ninst; ++i)
      for (NodeId p = 0; p < ctx.n; ++p)
        if (!meds[i][p].empty())
          sw.flag("forgetful_state",
                  "mediator set of p" + std::to_string(p) +
                      " nonempty at a quiescent time");
    if (ctx.trace_reports && trace_forwarded != trace_reported)
      sw.flag("forgetful_state",
              "unresolved trace records at a quiescent time: " +
                  std::to_string(trace_forwarded - trace_reported));
  };

  const std::int64_t sigma0 = team_size_of(ctx, 0);

  for (std::size_t idx = 0; idx < log.records.size(); ++idx) {
    const LogRecord& r = log.records[idx];
    sw.cur = r.seq;
    if (is_boundary(r.kind)) {
      ++activation;
      last_delivery.reset();
      last_delivery_flight = -1;
      // Guarantee 1 at the previous boundary: operational implies busy.
      // (checked lazily below through MedsAdd / TokChange hooks)
    }
    record_activation[idx] = activation;

    switch (r.kind) {
      case RecordKind::Toggle: {
        if (r.t > 0 && !quiescent_now())
          sw.flag("toggle_quiescent",
                  "status toggle at a non-quiescent time");
        bool is_fragile = false;
        for (NodeId f : ctx.fragile) is_fragile |= f == r.node;
        if (!is_fragile)
          sw.flag("toggle_quiescent", "toggle of a non-fragile node");
        faulty[r.node] = r.a != 0;
        break;
      }
      case RecordKind::Send: {
        link_queue[link_key(r.node, r.peer)].push_back(r.d);
        send_tick[r.d] = r.t;
        send_rec[r.d] = &r;
        ++transit_count;
        if (r.has_msg && r.msg == MsgType::Transport) {
          in_transit += r.a;
          if (r.role == Role::Primary) trace_forwarded += r.a;
          if (r.role == Role::Utility) trace_forwarded += r.a;
        }
        if (r.has_msg && is_principal(r.msg) && r.role == Role::Primary) {
          // first hop of a relayed message
          RelayFlight f;
          f.inst = r.instance;
          f.type = r.msg;
          f.sender = r.node;
          f.mediator = r.peer;
          f.sent = r.t;
          f.tokens = r.msg == MsgType::Transport ? r.a : 0;
          auto it = meds[r.instance][r.node].find(r.peer);
          if (it == meds[r.instance][r.node].end()) {
            sw.flag("relay_freshness",
                    "relayed send without a registered mediator");
          } else {
            f.epoch = it->second;
            auto ep = epochs.find({r.instance, f.epoch});
            if (ep != epochs.end())
              f.peer = ep->second.p1 == r.node ? ep->second.p2 : ep->second.p1;
          }
          flights[r.d] = f;
        }
        if (r.has_msg && is_principal(r.msg) && r.role == Role::Utility) {
          // second hop: emitted inside the mediator's relay activation
          if (last_delivery_flight >= 0)
            hop2_to_flight[r.d] = last_delivery_flight;
        }
        if (r.has_msg && r.msg == MsgType::Transport &&
            r.role == Role::Primary) {
          // all-or-nothing transports below the team size
          const auto& hist = tok_hist[r.instance][r.node];
          const std::int64_t before = hist.empty() ? 0 : hist.back().second;
          if (before != r.a)
            sw.flag("transport_all_tokens",
                    "transport of " + std::to_string(r.a) + " while holding " +
                        std::to_string(before));
          if (!ctx.instances.empty() &&
              !ctx.instances[r.instance].diff_mode &&
              r.a >= ctx.instances[r.instance].sigma)
            sw.flag("transport_below_sigma",
                    "transport of " + std::to_string(r.a) +
                        " tokens at or above the team size");
        }
        if (r.has_msg && r.msg == MsgType::Channel && r.role == Role::Utility)
          ++diff[{r.instance, r.node, r.peer}];
        break;
      }
      case RecordKind::Deliver:
      case RecordKind::DropFaulty: {
        auto& q = link_queue[link_key(r.peer, r.node)];
        if (q.empty() || q.front() != r.d) {
          sw.flag("fifo_order", "delivery out of per-link send order");
          auto pos = std::find(q.begin(), q.end(), r.d);
          if (pos != q.end()) q.erase(pos);
        } else {
          q.pop_front();
        }
        --transit_count;
        auto st = send_tick.find(r.d);
        if (st != send_tick.end()) {
          const Tick delta = r.t - st->second;
          if (delta <= 0 || delta > kUnit)
            sw.flag("delay_bound",
                    "message delay " + std::to_string(units_from_ticks(delta)) +
                        " outside (0,1]");
        }
        if (r.has_msg && r.msg == MsgType::Transport) in_transit -= r.a;
        if (r.kind == RecordKind::DropFaulty) {
          if (r.has_msg && r.msg == MsgType::Transport) limbo += r.a;
          if (r.has_msg && r.msg == MsgType::TraceReport)
            sw.flag("trace_faulty_hop",
                    "formation report dropped at a faulty node");
          break;
        }
        last_delivery = r;
        if (r.has_msg && is_principal(r.msg)) {
          if (r.role == Role::Utility) {
            last_delivery_flight = r.d;
          } else {
            // final delivery at the peer primary
            auto h2 = hop2_to_flight.find(r.d);
            if (h2 != hop2_to_flight.end()) {
              auto fl = flights.find(h2->second);
              if (fl != flights.end()) {
                fl->second.delivered = r.t;
                RelayFlight& f = fl->second;
                // Freshness: received over the same channel within 2 units.
                auto m = meds[r.instance][r.node].find(r.peer);
                const bool screened_here =
                    m == meds[r.instance][r.node].end() ||
                    m->second != f.epoch;
                if (!screened_here) {
                  if (r.t - f.sent > 2 * kUnit)
                    sw.flag("relay_freshness",
                            "relayed message crossed in more than 2 units");
                  if (f.peer != r.node)
                    sw.flag("relay_freshness",
                            "relayed message surfaced at a non-peer");
                  if (f.type == MsgType::Transport) {
                    // Transports in flight point at a busy holder of the
                    // carrying channel the whole way.
                    const auto& hist = tok_hist[r.instance][r.node];
                    std::int64_t at_recv =
                        hist.empty() ? 0 : hist.back().second;
                    if (at_recv <= 0)
                      sw.flag("transport_target_busy",
                              "transport delivered to a non-busy node");
                  }
                }
              }
            }
          }
        }
        if (r.has_msg && r.msg == MsgType::ChannelAck &&
            r.role == Role::Utility) {
          auto& d = diff[{r.instance, r.node, r.peer}];
          if (--d < 0)
            sw.flag("diff_quiescence", "ChannelAck without matching Channel");
        }
        if (r.has_msg && r.msg == MsgType::TraceReport) trace_reported += r.a;
        break;
      }
      case RecordKind::Inject: {
        injected += r.a;
        break;
      }
      case RecordKind::FakeInject: {
        if (r.d == 1)
          pending_buf -= r.a;  // deferred phase-buffer parcel landing
        else
          fake_pending -= r.a;
        break;
      }
      case RecordKind::PendingChange: {
        pending_buf += r.b - r.a;
        break;
      }
      case RecordKind::TokChange: {
        const Instance i = r.instance;
        if (i >= ninst) break;
        held += r.b - r.a;
        tok[i][r.node] = r.b;
        tok_hist[i][r.node].push_back({r.seq, r.b});
        if (r.a == 0 && r.b > 0)
          busy[i][r.node].push_back({r.t, -1});
        if (r.a > 0 && r.b == 0 && !busy[i][r.node].empty())
          busy[i][r.node].back().hi = r.t;
        break;
      }
      case RecordKind::TeamForm: {
        const std::int64_t size = team_size_of(ctx, r.instance);
        deleted += r.a * size;
        fake_pending += r.b;
        if (r.a < 1) sw.flag("team_safety", "formation of zero teams");
        // held at the node must have covered the deletion
        const auto& hist = tok_hist[r.instance][r.node];
        const std::int64_t before = hist.empty() ? 0 : hist.back().second;
        if (before != r.a * size + r.b)
          sw.flag("team_safety",
                  "formation consumed " + std::to_string(r.a * size) +
                      " plus remainder " + std::to_string(r.b) +
                      " but the node held " + std::to_string(before));
        break;
      }
      case RecordKind::MedsAdd: {
        const Instance i = r.instance;
        if (i >= ninst) break;
        meds[i][r.node][r.peer] = static_cast<std::uint64_t>(r.c);
        if (tok[i][r.node] <= 0)
          sw.flag("operational_implies_busy",
                  "mediator registered at a token-less primary");
        if (ctx.graph &&
            meds[i][r.node].size() > ctx.graph->utilities_of(r.node).size())
          sw.flag("degree_bound", "more mediators than overlay neighbors");
        auto& ep = epochs[{i, static_cast<std::uint64_t>(r.c)}];
        if (ep.u >= 0 && (r.peer == ep.u)) {
          ep.add[ep.side(r.node)] = r.t;
        }
        break;
      }
      case RecordKind::MedsRemove: {
        const Instance i = r.instance;
        if (i >= ninst) break;
        meds[i][r.node].erase(r.peer);
        auto it = epochs.find({i, static_cast<std::uint64_t>(r.c)});
        if (it != epochs.end()) {
          const int s = it->second.side(r.node);
          if (it->second.rem[s] < 0) {
            it->second.rem[s] = r.t;
            it->second.rem_seq[s] = r.seq;
            it->second.rem_activation[s] = activation;
          }
        }
        break;
      }
      case RecordKind::ChanCreate: {
        EpochInfo ep;
        ep.u = r.node;
        ep.p1 = static_cast<NodeId>(r.a);
        ep.p2 = static_cast<NodeId>(r.b);
        ep.inst = r.instance;
        ep.create = r.t;
        epochs[{r.instance, static_cast<std::uint64_t>(r.c)}] = ep;
        break;
      }
      case RecordKind::PhaseBegin: {
        open_phases[{r.instance, r.node, r.d}] = {r.t, r.a != 0};
        break;
      }
      case RecordKind::PhaseEnd: {
        auto it = open_phases.find({r.instance, r.node, r.d});
        if (it == open_phases.end()) {
          sw.flag("phase_bound", "phase end without a matching begin");
        } else {
          if (r.t - it->second.begin > 8 * kUnit)
            sw.flag("phase_bound",
                    "phase lasted " +
                        std::to_string(units_from_ticks(r.t - it->second.begin)) +
                        " units (> 8)");
          open_phases.erase(it);
        }
        break;
      }
      case RecordKind::Screened: {
        limbo += r.a;
        if (r.a > 0)
          sw.flag("limbo_free", "tokens screened away mid-route");
        break;
      }
      default:
        break;
    }

    // Audit at activation boundaries: the upcoming record either starts the
    // next activation or the log ends here.
    const bool at_boundary = idx + 1 >= log.records.size() ||
                             is_boundary(log.records[idx + 1].kind);
    if (at_boundary) {
      if (injected != deleted + held + fake_pending + pending_buf +
                          in_transit + limbo) {
        sw.flag("conservation",
                "ledger imbalance: injected " + std::to_string(injected) +
                    " != deleted " + std::to_string(deleted) + " + held " +
                    std::to_string(held + fake_pending + pending_buf) +
                    " + transit " + std::to_string(in_transit) + " + limbo " +
                    std::to_string(limbo));
        break;  // soup from here on, stop
      }
      if (ctx.expect_limbo_free && limbo != 0)
        sw.flag("limbo_free", "tokens in limbo");
      // quiescent instants: nothing pending and the next event (if any)
      // happens at a strictly later tick
      if (quiescent_now()) {
        const bool later = idx + 1 >= log.records.size() ||
                           log.records[idx + 1].t > r.t;
        if (later) check_quiescent_state(r.seq);
      }
    }
  }

  // --- post-pass checks -----------------------------------------------------

  // Fake-injection budget: remainder re-injections stay strictly below the
  // environment's own injections (each remainder is attributable to a
  // formation of a full team).
  {
    std::int64_t fake_total = 0;
    for (const auto& r : log.records)
      if (r.kind == RecordKind::FakeInject && r.d != 1) fake_total += r.a;
    if (injected > 0 && fake_total >= injected)
      sw.out.push_back({"fake_budget", 0,
                        "remainder re-injections (" +
                            std::to_string(fake_total) +
                            ") reached the environment's count (" +
                            std::to_string(injected) + ")"});
  }

  // Transports in flight point at a busy holder of the carrying channel for
  // the whole flight, and every relayed send either lands within two units
  // or its target dropped the channel by then.
  for (const auto& [env_id, f] : flights) {
    if (f.peer < 0 || f.epoch == 0) continue;
    auto ep = epochs.find({f.inst, f.epoch});
    if (ep == epochs.end()) continue;
    const EpochInfo& e = ep->second;
    const int side = e.side(f.peer);
    if (f.delivered >= 0) {
      if (f.type == MsgType::Transport) {
        bool covered = false;
        for (const auto& iv : busy[f.inst][f.peer])
          if (iv.lo <= f.sent && (iv.hi < 0 || iv.hi >= f.delivered))
            covered = true;
        if (!covered)
          sw.out.push_back({"transport_target_busy", 0,
                            "transport target p" + std::to_string(f.peer) +
                                " not busy across the flight"});
        const bool chan_covered =
            e.add[side] >= 0 && e.add[side] <= f.sent &&
            (e.rem[side] < 0 || e.rem[side] >= f.delivered);
        if (!chan_covered)
          sw.out.push_back({"transport_target_busy", 0,
                            "transport target dropped the carrying channel "
                            "mid-flight"});
      }
    } else {
      // never surfaced at the peer: the channel must have left the target
      // within two units of the send (or never have been registered there)
      const bool removed_in_time =
          e.add[side] < 0 || (e.rem[side] >= 0 &&
                              e.rem[side] <= f.sent + 2 * kUnit);
      if (!removed_in_time)
        sw.out.push_back({"relay_delivery", 0,
                          "relayed message neither delivered nor released "
                          "within two units"});
    }
  }

  // Channel-setup window: whenever two nodes sharing a live utility stay
  // busy through a full window, some operational channel existed inside it.
  const Tick W = ctx.setup_window;
  if (ctx.graph) {
    for (Instance inst = 0; inst < static_cast<Instance>(ninst); ++inst) {
      // merged operational intervals and their complement gaps
      std::vector<std::pair<Tick, Tick>> oc;
      for (const auto& [key, e] : epochs) {
        if (key.first != inst || !e.operational()) continue;
        const Tick lo = e.op_start();
        const Tick hi = e.first_rem() < 0 ? INT64_MAX : e.first_rem();
        oc.push_back({lo, hi});
      }
      std::sort(oc.begin(), oc.end());
      std::vector<std::pair<Tick, Tick>> merged;
      for (auto& iv : oc) {
        if (!merged.empty() && iv.first <= merged.back().second)
          merged.back().second = std::max(merged.back().second, iv.second);
        else
          merged.push_back(iv);
      }
      std::vector<std::pair<Tick, Tick>> gaps;
      Tick cursor = 0;
      for (auto& iv : merged) {
        if (iv.first > cursor) gaps.push_back({cursor, iv.first});
        cursor = std::max(cursor, iv.second);
      }
      if (cursor != INT64_MAX) gaps.push_back({cursor, INT64_MAX});

      // long busy stretches per node
      struct Stretch {
        NodeId p;
        Tick lo, hi;  // candidate window starts within [lo, hi]
      };
      std::vector<Stretch> stretches;
      const Tick run_end =
          log.records.empty() ? 0 : log.records.back().t;
      for (NodeId p = 0; p < ctx.n; ++p) {
        for (const auto& iv : busy[inst][p]) {
          const Tick hi = iv.hi < 0 ? run_end : iv.hi;
          if (hi - iv.lo >= W) stretches.push_back({p, iv.lo, hi - W});
        }
      }
      for (std::size_t i = 0; i < stretches.size(); ++i) {
        for (std::size_t j = i + 1; j < stretches.size(); ++j) {
          if (stretches[i].p == stretches[j].p) continue;
          const Tick a = std::max(stretches[i].lo, stretches[j].lo);
          const Tick b = std::min(stretches[i].hi, stretches[j].hi);
          if (a > b) continue;
          // a non-faulty shared utility must exist (statuses cannot change
          // while these two stay busy)
          bool shared_live = false;
          const auto& ua = ctx.graph->utilities_of(stretches[i].p);
          const auto& ub = ctx.graph->utilities_of(stretches[j].p);
          std::size_t x = 0, y = 0;
          while (x < ua.size() && y < ub.size()) {
            if (ua[x] == ub[y]) {
              if (!faulty[ua[x]]) {
                shared_live = true;
                break;
              }
              ++x, ++y;
            } else if (ua[x] < ub[y]) {
              ++x;
            } else {
              ++y;
            }
          }
          if (!shared_live) continue;
          for (const auto& g : gaps) {
            // a violating start t0 must have its whole window (t0, t0+4]
            // inside the gap [g.first, g.second)
            const Tick lo = std::max(a, g.first);
            if (lo > b) continue;
            const bool violating =
                g.second == INT64_MAX || lo + W < g.second;
            if (violating) {
              sw.out.push_back(
                  {"channel_setup_window", 0,
                   "nodes p" + std::to_string(stretches[i].p) + "/p" +
                       std::to_string(stretches[j].p) +
                       " stayed busy through a setup window with no "
                       "operational channel"});
              break;
            }
          }
        }
      }
    }
  }

  // Guarantee 1 on the final state plus guarantee 3 teardown timing.
  for (auto& [key, ep] : epochs) {
    if (!ep.operational()) continue;
    const Tick t_first = ep.first_rem();
    if (t_first < 0) continue;  // still operational at the end (censored run)
    const int first_side = (ep.rem[0] >= 0 && (ep.rem[1] < 0 ||
                                               ep.rem[0] <= ep.rem[1]))
                               ? 0
                               : 1;
    const NodeId retiring = first_side == 0 ? ep.p1 : ep.p2;
    // the first removal must coincide with that endpoint going non-busy
    bool retired_here = false;
    for (const auto& [seq, v] : tok_hist[ep.inst][retiring]) {
      if (seq <= ep.rem_seq[first_side] &&
          record_activation[seq] == ep.rem_activation[first_side] && v == 0)
        retired_here = true;
    }
    if (!retired_here)
      sw.out.push_back(
          {"channel_teardown", ep.rem_seq[first_side],
           "an operational channel left an endpoint before retirement"});
    const int other = 1 - first_side;
    if (ep.rem[other] >= 0 && ep.rem[other] - ep.rem[first_side] > 2 * kUnit)
      sw.out.push_back({"channel_teardown", ep.rem_seq[other],
                        "peer kept a dead channel for more than 2 units"});
  }

  return std::move(sw.out);
}

std::vector<Violation> run_all_checkers(const ExecutionLog& log,
                                        const CheckContext& ctx) {
  auto v = check_pair_conformance(log, ctx);
  auto w = check_invariants(log, ctx);
  v.insert(v.end(), w.begin(), w.end());
  return v;
}

std::vector<PotentialPoint> potential_series(const ExecutionLog& log,
                                             const CheckContext& ctx,
                                             Instance instance) {
  std::vector<PotentialPoint> pts;
  std::vector<std::int64_t> tok(ctx.n, 0);
  std::vector<std::int64_t> toward(ctx.n, 0);  // R(p): transported inbound
  std::vector<std::map<NodeId, std::uint64_t>> meds(ctx.n);
  std::map<std::uint64_t, std::pair<NodeId, NodeId>> epoch_peers;
  std::int64_t held = 0, in_transit = 0, fake_pending = 0, pending = 0;

  auto emit = [&](const LogRecord& r, bool team, bool retire) {
    PotentialPoint p;
    p.seq = r.seq;
    p.t = r.t;
    std::int64_t m1 = 0, m2 = 0, psi = 0;
    for (NodeId v = 0; v < ctx.n; ++v) {
      const std::int64_t x = tok[v] + toward[v];
      if (tok[v] > 0) psi += x - 1;
      if (x >= m1) {
        m2 = m1;
        m1 = x;
      } else if (x > m2) {
        m2 = x;
      }
    }
    p.psi = psi;
    p.psi_hat = m1 + m2;
    p.tokens_in_system = held + in_transit + fake_pending + pending;
    p.team_formed_here = team;
    p.transport_retirement_here = retire;
    pts.push_back(p);
  };

  bool team_here = false, retire_here = false;
  const LogRecord* prev = nullptr;
  for (const auto& r : log.records) {
    if (is_boundary(r.kind) && prev) {
      emit(*prev, team_here, retire_here);
      team_here = retire_here = false;
    }
    prev = &r;
    if (r.instance != instance) continue;
    switch (r.kind) {
      case RecordKind::TokChange:
        held += r.b - r.a;
        tok[r.node] = r.b;
        break;
      case RecordKind::PendingChange:
        pending += r.b - r.a;
        break;
      case RecordKind::FakeInject:
        if (r.d == 1)
          pending -= r.a;
        else
          fake_pending -= r.a;
        break;
      case RecordKind::TeamForm:
        fake_pending += r.b;
        team_here = true;
        break;
      case RecordKind::MedsAdd:
        meds[r.node][r.peer] = static_cast<std::uint64_t>(r.c);
        break;
      case RecordKind::MedsRemove:
        meds[r.node].erase(r.peer);
        break;
      case RecordKind::ChanCreate:
        epoch_peers[static_cast<std::uint64_t>(r.c)] = {
            static_cast<NodeId>(r.a), static_cast<NodeId>(r.b)};
        break;
      case RecordKind::Send:
        if (r.has_msg && r.msg == MsgType::Transport) {
          in_transit += r.a;
          if (r.role == Role::Primary) {
            retire_here = true;
            auto m = meds[r.node].find(r.peer);
            if (m != meds[r.node].end()) {
              auto ep = epoch_peers.find(m->second);
              if (ep != epoch_peers.end()) {
                const NodeId target = ep->second.first == r.node
                                          ? ep->second.second
                                          : ep->second.first;
                toward[target] += r.a;
              }
            }
          }
        }
        break;
      case RecordKind::Deliver:
      case RecordKind::DropFaulty:
        if (r.has_msg && r.msg == MsgType::Transport) {
          in_transit -= r.a;
          if (r.kind == RecordKind::Deliver && r.role == Role::Primary)
            toward[r.node] -= r.a;
        }
        break;
      default:
        break;
    }
  }
  if (prev) emit(*prev, team_here, retire_here);
  return pts;
}

}  // namespace teamform
