#include <array>
#include <map>
#include <regex>

#include "teamform/checkers.hpp"

namespace teamform {

namespace {

// Pair events, in incidence-matrix column order.
enum PairEvent : int {
  kTokIncrease = 0,  // p.tok increases within Z>0
  kTokToggle,        // p.tok = 0 toggled (either direction)
  kMedToggle,        // 'u mediates p' toggled at the utility side
  kUBusy,            // u receives Busy
  kUTokensUpdate,    // u receives TokensUpdate
  kUNotBusy,         // u receives NotBusy
  kPBusyAck,         // p receives BusyAck
  kPChannel,         // p receives Channel
  kPNoChannel,       // p receives NoChannel
  kEventCount
};

const char* event_name(int e) {
  static const char* names[] = {
      "tok_increase", "tok_toggle",  "mediation_toggle",
      "u_recv_busy",  "u_recv_tu",   "u_recv_notbusy",
      "p_recv_ack",   "p_recv_chan", "p_recv_nochan"};
  return names[e];
}

// Incidence matrix over the 15 reachable configurations; 0 marks an
// inapplicable event. Row/column order follows the configuration table.
constexpr int kMatrix[16][kEventCount] = {
    {},                                    // index 0 unused
    {0, 6, 0, 2, 0, 0, 0, 1, 1},           // 1
    {0, 7, 0, 2, 0, 0, 3, 2, 2},           // 2
    {0, 8, 0, 3, 4, 1, 0, 0, 0},           // 3
    {0, 9, 5, 0, 4, 1, 0, 4, 4},           // 4
    {0, 10, 4, 0, 5, 1, 0, 5, 5},          // 5
    {6, 1, 0, 7, 0, 0, 0, 6, 6},           // 6
    {7, 2, 0, 7, 0, 0, 11, 7, 7},          // 7
    {8, 3, 0, 8, 9, 6, 0, 8, 8},           // 8
    {9, 4, 10, 0, 9, 6, 0, 9, 9},          // 9
    {10, 5, 9, 0, 10, 6, 0, 10, 10},       // 10
    {11, 3, 0, 11, 12, 0, 0, 0, 0},        // 11
    {12, 4, 13, 0, 12, 0, 0, 14, 0},       // 12
    {13, 5, 12, 0, 13, 0, 0, 15, 0},       // 13
    {14, 4, 15, 0, 14, 0, 0, 0, 12},       // 14
    {15, 5, 14, 0, 15, 0, 0, 0, 13},       // 15
};

struct RowFacts {
  bool tok_pos, ba, med, chan;
  int bt;  // 0 = unknown, 1 = zero, 2 = positive
};
constexpr RowFacts kRowFacts[16] = {
    {},
    {false, false, false, false, 0},  // 1
    {false, false, false, false, 1},  // 2
    {false, false, false, false, 1},  // 3
    {false, false, false, false, 2},  // 4
    {false, false, false, true, 2},   // 5
    {true, false, false, false, 0},   // 6
    {true, false, false, false, 1},   // 7
    {true, false, false, false, 1},   // 8
    {true, false, false, false, 2},   // 9
    {true, false, false, true, 2},    // 10
    {true, true, false, false, 1},    // 11
    {true, true, false, false, 2},    // 12
    {true, true, false, true, 2},     // 13
    {true, true, true, false, 2},     // 14
    {true, true, true, true, 2},      // 15
};

// In-flight link contents, newest first. Characters: B=Busy, T=TokensUpdate,
// N=NotBusy (primary->utility); A=BusyAck, C=Channel, X=NoChannel
// (utility->primary). ChannelAck and relayed traffic are tracked separately.
const char* kPuPattern[16] = {
    "",       "B*",      "B*",      "B*NT*B*", "B*NT*", "B*NT*",
    "B+",     "B*",      "B+NT*B*", "B+NT*",   "B+NT*", "T+B*",
    "T*",     "T*",      "T*",      "T*",
};
const char* kUpPattern[16] = {
    "",           "X?(CX)*C?",  "AX?(CX)*C?", "",       "(XC)*X?",
    "(CX)*C?",    "X?(CX)*C?",  "AX?(CX)*C?", "",       "(XC)*X?",
    "(CX)*C?",    "",           "(XC)*",      "C(XC)*", "X(CX)*",
    "(CX)*",
};

char control_char(MsgType t) {
  switch (t) {
    case MsgType::Busy: return 'B';
    case MsgType::TokensUpdate: return 'T';
    case MsgType::NotBusy: return 'N';
    case MsgType::BusyAck: return 'A';
    case MsgType::Channel: return 'C';
    case MsgType::NoChannel: return 'X';
    default: return 0;
  }
}

struct PairState {
  std::uint8_t row = 1;
  std::string pu;  // newest first
  std::string up;
  bool dirty = false;
};

struct Checker {
  const ExecutionLog& log;
  const CheckContext& ctx;
  std::vector<Violation> out;

  std::map<std::uint64_t, PairState> pairs;
  std::vector<std::vector<std::int64_t>> tok;  // [instance][p]
  std::vector<bool> faulty;
  std::vector<std::uint64_t> dirty_keys;
  std::array<std::regex, 16> pu_re, up_re;
  std::uint64_t cur_seq = 0;

  explicit Checker(const ExecutionLog& l, const CheckContext& c)
      : log(l), ctx(c) {
    tok.assign(ctx.instances.size(),
               std::vector<std::int64_t>(ctx.n, 0));
    faulty.assign(ctx.n, false);
    for (int r = 1; r <= 15; ++r) {
      pu_re[r] = std::regex(std::string("^") + kPuPattern[r] + "$");
      up_re[r] = std::regex(std::string("^") + kUpPattern[r] + "$");
    }
  }

  static std::uint64_t key(Instance inst, NodeId p, NodeId u) {
    return (static_cast<std::uint64_t>(inst) << 48) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p)) << 24) |
           static_cast<std::uint32_t>(u);
  }

  void flag(const std::string& check, const std::string& detail) {
    out.push_back({check, cur_seq, detail});
  }

  PairState& pair(Instance inst, NodeId p, NodeId u) {
    auto [it, added] = pairs.try_emplace(key(inst, p, u));
    if (!it->second.dirty) {
      it->second.dirty = true;
      dirty_keys.push_back(key(inst, p, u));
    }
    return it->second;
  }

  bool suspended(NodeId p, NodeId u) const { return faulty[p] || faulty[u]; }

  void apply(Instance inst, NodeId p, NodeId u, int event) {
    PairState& ps = pair(inst, p, u);
    if (suspended(p, u)) return;
    const int next = kMatrix[ps.row][event];
    if (next == 0) {
      flag("pair_transition",
           "inapplicable event " + std::string(event_name(event)) +
               " in configuration " + std::to_string(ps.row) + " for pair p" +
               std::to_string(p) + "/u" + std::to_string(u) + " inst " +
               std::to_string(inst));
      return;
    }
    ps.row = static_cast<std::uint8_t>(next);
  }

  void on_send(Instance inst, NodeId p, NodeId u, char c) {
    PairState& ps = pair(inst, p, u);
    // log order within an activation is authoritative for send order
    ps.pu.insert(ps.pu.begin(), c);
    (void)inst;
  }
  void on_send_up(Instance inst, NodeId p, NodeId u, char c) {
    PairState& ps = pair(inst, p, u);
    ps.up.insert(ps.up.begin(), c);
    (void)inst;
  }

  void pop_oldest(std::string& s, char c, const char* link, NodeId p,
                  NodeId u) {
    if (s.empty() || s.back() != c) {
      flag("pair_fifo", std::string("delivered ") + c + " on " + link +
                            " link p" + std::to_string(p) + "/u" +
                            std::to_string(u) + " but oldest in flight is '" +
                            (s.empty() ? std::string("-") : std::string(1, s.back())) +
                            "'");
      // drop a matching char if any to resynchronize
      auto pos = s.find_last_of(c);
      if (pos != std::string::npos) s.erase(pos, 1);
      return;
    }
    s.pop_back();
  }

  void verify_boundary() {
    for (std::uint64_t k : dirty_keys) {
      auto& ps = pairs[k];
      ps.dirty = false;
      const Instance inst = static_cast<Instance>(k >> 48);
      const NodeId p = static_cast<NodeId>((k >> 24) & 0xFFFFFF);
      const NodeId u = static_cast<NodeId>(k & 0xFFFFFF);
      if (suspended(p, u)) continue;
      const RowFacts& f = kRowFacts[ps.row];
      const bool tok_pos = tok[inst][p] > 0;
      if (tok_pos != f.tok_pos)
        flag("pair_state", "configuration " + std::to_string(ps.row) +
                               " disagrees with tok sign at p" +
                               std::to_string(p) + "/u" + std::to_string(u));
      if (!std::regex_match(ps.pu, pu_re[ps.row]))
        flag("pair_link", "p->u contents '" + ps.pu +
                              "' illegal in configuration " +
                              std::to_string(ps.row) + " (p" +
                              std::to_string(p) + "/u" + std::to_string(u) +
                              ")");
      if (!std::regex_match(ps.up, up_re[ps.row]))
        flag("pair_link", "u->p contents '" + ps.up +
                              "' illegal in configuration " +
                              std::to_string(ps.row) + " (p" +
                              std::to_string(p) + "/u" + std::to_string(u) +
                              ")");
    }
    dirty_keys.clear();
  }

  void assert_initial_for_node(NodeId v, const char* why) {
    for (auto& [k, ps] : pairs) {
      const NodeId p = static_cast<NodeId>((k >> 24) & 0xFFFFFF);
      const NodeId u = static_cast<NodeId>(k & 0xFFFFFF);
      if (p != v && u != v) continue;
      if (ps.row != 1 || !ps.pu.empty() || !ps.up.empty())
        flag("pair_toggle_boundary",
             std::string(why) + ": pair p" + std::to_string(p) + "/u" +
                 std::to_string(u) + " not at the initial configuration " +
                 "(row " + std::to_string(ps.row) + ", links '" + ps.pu +
                 "'/'" + ps.up + "')");
    }
  }

  void run() {
    for (const auto& r : log.records) {
      cur_seq = r.seq;
      const bool boundary = r.kind == RecordKind::Deliver ||
                            r.kind == RecordKind::DropFaulty ||
                            r.kind == RecordKind::Inject ||
                            r.kind == RecordKind::FakeInject ||
                            r.kind == RecordKind::Start ||
                            r.kind == RecordKind::Toggle;
      if (boundary) verify_boundary();

      switch (r.kind) {
        case RecordKind::Toggle: {
          const NodeId v = r.node;
          assert_initial_for_node(v, r.a ? "toggle to faulty"
                                         : "toggle to non-faulty");
          faulty[v] = r.a != 0;
          break;
        }
        case RecordKind::TokChange: {
          const Instance inst = r.instance;
          if (inst >= tok.size()) break;
          tok[inst][r.node] = r.b;
          const bool was_zero = r.a == 0, is_zero = r.b == 0;
          int ev = -1;
          if (was_zero != is_zero)
            ev = kTokToggle;
          else if (!was_zero && r.b > r.a)
            ev = kTokIncrease;
          else if (!was_zero && r.b < r.a)
            flag("pair_transition", "tok decreased within the positive range");
          if (ev >= 0 && ctx.graph)
            for (NodeId u : ctx.graph->utilities_of(r.node))
              apply(inst, r.node, u, ev);
          break;
        }
        case RecordKind::Send: {
          const char c = r.has_msg ? control_char(r.msg) : 0;
          if (!c) break;
          if (r.msg == MsgType::ChannelAck) break;  // tracked via diff
          if (r.role == Role::Primary)
            on_send(r.instance, r.node, r.peer, c);
          else
            on_send_up(r.instance, r.peer, r.node, c);
          break;
        }
        case RecordKind::DropFaulty:
        case RecordKind::Deliver: {
          const char c = r.has_msg ? control_char(r.msg) : 0;
          if (!c) break;
          if (r.msg == MsgType::ChannelAck) break;
          NodeId p, u;
          bool to_utility = r.role == Role::Utility;
          if (to_utility) {
            u = r.node;
            p = r.peer;
            pop_oldest(pair(r.instance, p, u).pu, c, "p->u", p, u);
          } else {
            p = r.node;
            u = r.peer;
            pop_oldest(pair(r.instance, p, u).up, c, "u->p", p, u);
          }
          if (r.kind == RecordKind::DropFaulty) break;
          int ev = -1;
          switch (r.msg) {
            case MsgType::Busy: ev = kUBusy; break;
            case MsgType::TokensUpdate: ev = kUTokensUpdate; break;
            case MsgType::NotBusy: ev = kUNotBusy; break;
            case MsgType::BusyAck: ev = kPBusyAck; break;
            case MsgType::Channel: ev = kPChannel; break;
            case MsgType::NoChannel: ev = kPNoChannel; break;
            default: break;
          }
          if (ev >= 0) apply(r.instance, p, u, ev);
          break;
        }
        case RecordKind::ChanCreate: {
          apply(r.instance, static_cast<NodeId>(r.a), r.node, kMedToggle);
          apply(r.instance, static_cast<NodeId>(r.b), r.node, kMedToggle);
          break;
        }
        case RecordKind::ChanRelease: {
          // The endpoint whose NotBusy triggered the release (d) loses its
          // chan membership inside that very event column; only the
          // surviving peer observes a separate mediation toggle.
          const NodeId trigger = static_cast<NodeId>(r.d);
          const NodeId peer = static_cast<NodeId>(r.a) == trigger
                                  ? static_cast<NodeId>(r.b)
                                  : static_cast<NodeId>(r.a);
          apply(r.instance, peer, r.node, kMedToggle);
          break;
        }
        case RecordKind::MedsAdd: {
          const PairState& ps = pair(r.instance, r.node, r.peer);
          if (!suspended(r.node, r.peer) && !kRowFacts[ps.row].med)
            flag("pair_meds",
                 "mediator registration in a configuration without mediation"
                 " (row " + std::to_string(ps.row) + ")");
          break;
        }
        case RecordKind::MedsRemove: {
          const PairState& ps = pair(r.instance, r.node, r.peer);
          if (!suspended(r.node, r.peer) && kRowFacts[ps.row].med)
            flag("pair_meds",
                 "mediator removal while the configuration still mediates"
                 " (row " + std::to_string(ps.row) + ")");
          break;
        }
        default:
          break;
      }
    }
    verify_boundary();
  }
};

}  // namespace

std::vector<Violation> check_pair_conformance(const ExecutionLog& log,
                                              const CheckContext& ctx) {
  Checker c(log, ctx);
  for (NodeId f : ctx.fragile) c.faulty[f] = true;
  c.run();
  return std::move(c.out);
}

}  // namespace teamform
