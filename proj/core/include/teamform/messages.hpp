#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace teamform {

using NodeId = std::int32_t;
using Instance = std::uint16_t;

// Every physical node simulates a primary and a utility virtual node; all
// protocol traffic flows between the two sides of the overlay.
enum class Role : std::uint8_t { Primary = 0, Utility = 1 };

struct VAddr {
  NodeId node = -1;
  Role role = Role::Primary;
  friend bool operator==(const VAddr&, const VAddr&) = default;
};

inline std::string vaddr_string(VAddr a) {
  return (a.role == Role::Primary ? "p" : "u") + std::to_string(a.node);
}

enum class MsgType : std::uint8_t {
  // channel layer, primary -> utility
  Busy,
  TokensUpdate,
  NotBusy,
  ChannelAck,
  // channel layer, utility -> primary
  BusyAck,
  Channel,
  NoChannel,
  // principal layer (always wrapped as relayed traffic p -> u -> p')
  TokensPlease,
  Waiting,
  NoTransport,
  Transport,
  GoOn,
  // out-of-overlay traffic
  TraceReport,
  LeaderAnnounce,
};

inline bool is_principal(MsgType t) {
  switch (t) {
    case MsgType::TokensPlease:
    case MsgType::Waiting:
    case MsgType::NoTransport:
    case MsgType::Transport:
    case MsgType::GoOn:
      return true;
    default:
      return false;
  }
}

inline bool is_channel_control(MsgType t) {
  switch (t) {
    case MsgType::Busy:
    case MsgType::TokensUpdate:
    case MsgType::NotBusy:
    case MsgType::ChannelAck:
    case MsgType::BusyAck:
    case MsgType::Channel:
    case MsgType::NoChannel:
      return true;
    default:
      return false;
  }
}

inline const char* msg_name(MsgType t) {
  switch (t) {
    case MsgType::Busy: return "Busy";
    case MsgType::TokensUpdate: return "TokensUpdate";
    case MsgType::NotBusy: return "NotBusy";
    case MsgType::ChannelAck: return "ChannelAck";
    case MsgType::BusyAck: return "BusyAck";
    case MsgType::Channel: return "Channel";
    case MsgType::NoChannel: return "NoChannel";
    case MsgType::TokensPlease: return "TokensPlease";
    case MsgType::Waiting: return "Waiting";
    case MsgType::NoTransport: return "NoTransport";
    case MsgType::Transport: return "Transport";
    case MsgType::GoOn: return "GoOn";
    case MsgType::TraceReport: return "TraceReport";
    case MsgType::LeaderAnnounce: return "LeaderAnnounce";
  }
  return "?";
}

// Wire form. `k` is the token count for Transport/TokensUpdate, `term` the
// count of TERM-marked tokens riding a Transport, `stamp` the per-port
// outgoing counter value attached to token batches, `colors` a 2-bit palette
// mask used by the two-color pairing variant. `epoch` identifies the mediator
// channel incarnation for instrumentation only; the protocol itself never
// branches on it (peers need no common channel names).
struct Msg {
  MsgType type = MsgType::Busy;
  std::int64_t k = 0;
  std::int64_t term = 0;
  std::uint64_t stamp = 0;
  std::uint64_t epoch = 0;
  std::uint8_t colors = 0;
  // TraceReport payload: one formation id plus the out-counter values the
  // receiver should match on the reverse port; reports to one predecessor are
  // batched into a single message.
  std::uint64_t formation_id = 0;
  std::vector<std::uint64_t> counters;

  std::int64_t tokens_carried() const {
    return type == MsgType::Transport ? k : 0;
  }
};

}  // namespace teamform
