#include "teamform/metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace teamform {

namespace {
bool starts_activation(RecordKind k) {
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
}  // namespace

std::vector<ReactionSample> reaction_samples(const ExecutionLog& log,
                                             const CheckContext& ctx,
                                             std::int64_t sigma,
                                             Instance instance) {
  std::vector<ReactionSample> out;
  std::int64_t held = 0, transit = 0, fake = 0, pending = 0;
  std::int64_t level = 0;  // settled count at the last activation boundary
  bool window_open = false;
  ReactionSample cur;
  bool cur_formed = false;
  (void)ctx;

  // Window transitions are evaluated at activation boundaries only;
  // mid-activation the counters pass through transient states (a transport
  // is logged before the sender's token drop).
  auto settle = [&](Tick t) {
    const std::int64_t now = held + transit + fake + pending;
    if (!window_open && level < sigma && now >= sigma) {
      window_open = true;
      cur = {};
      cur.start = t;
      cur_formed = false;
    } else if (window_open && now < sigma) {
      if (!cur_formed) {
        cur.censored = true;
        cur.formed_at = t;
        out.push_back(cur);
      }
      window_open = false;
    }
    level = now;
  };

  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    if (r.instance == instance) {
      switch (r.kind) {
        case RecordKind::TokChange:
          held += r.b - r.a;
          break;
        case RecordKind::PendingChange:
          pending += r.b - r.a;
          break;
        case RecordKind::FakeInject:
          if (r.d == 1)
            pending -= r.a;
          else
            fake -= r.a;
          break;
        case RecordKind::TeamForm:
          fake += r.b;
          if (window_open && !cur_formed) {
            cur.formed_at = r.t;
            cur_formed = true;
            out.push_back(cur);
          }
          break;
        case RecordKind::Send:
          if (r.has_msg && r.msg == MsgType::Transport) transit += r.a;
          break;
        case RecordKind::Deliver:
        case RecordKind::DropFaulty:
          if (r.has_msg && r.msg == MsgType::Transport) transit -= r.a;
          break;
        default:
          break;
      }
    }
    const bool boundary = i + 1 >= log.records.size() ||
                          starts_activation(log.records[i + 1].kind);
    if (boundary) settle(r.t);
  }
  if (window_open && !cur_formed && !log.records.empty()) {
    cur.censored = true;
    cur.formed_at = log.records.back().t;
    out.push_back(cur);
  }
  return out;
}

MessageCounts message_counts(const ExecutionLog& log,
                             bool count_piggybacked_once) {
  MessageCounts mc;
  Tick cur_t = -1;
  std::uint64_t activation = 0;
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;  // activation, dst
  for (const auto& r : log.records) {
    switch (r.kind) {
      case RecordKind::Deliver:
      case RecordKind::DropFaulty:
      case RecordKind::Inject:
      case RecordKind::FakeInject:
      case RecordKind::Start:
      case RecordKind::Toggle:
        ++activation;
        break;
      case RecordKind::Send: {
        if (count_piggybacked_once) {
          const std::uint64_t dst =
              (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r.peer))
               << 1) |
              (r.peer_role == Role::Utility ? 1 : 0);
          if (!seen.insert({activation, dst}).second) break;
        }
        ++mc.total;
        if (!r.has_msg) break;
        if (is_channel_control(r.msg))
          ++mc.channel_control;
        else if (is_principal(r.msg))
          ++mc.relayed;
        else
          ++mc.other;
        break;
      }
      default:
        break;
    }
    cur_t = r.t;
  }
  (void)cur_t;
  return mc;
}

double message_load(const ExecutionLog& log, std::int64_t injected,
                    bool count_piggybacked_once) {
  if (injected <= 0) return -1;
  return static_cast<double>(message_counts(log, count_piggybacked_once).total) /
         static_cast<double>(injected);
}

std::string MetricsRow::csv_header() {
  return "seed,n,sigma,policy,messages_total,messages_channel,"
         "messages_relayed,tokens_injected,tokens_fake,teams,load,"
         "reaction_p50,reaction_p95,reaction_censored,violations";
}

std::string MetricsRow::csv_row() const {
  std::ostringstream os;
  os << seed << ',' << n << ',' << sigma << ',' << policy << ','
     << messages_total << ',' << messages_channel << ',' << messages_relayed
     << ',' << tokens_injected << ',' << tokens_fake << ',' << teams << ','
     << load << ',' << reaction_p50 << ',' << reaction_p95 << ','
     << reaction_censored << ',' << violations;
  return os.str();
}

}  // namespace teamform
