#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "teamform/messages.hpp"
#include "teamform/sim_time.hpp"

namespace teamform {

enum class RecordKind : std::uint8_t {
  Send,        // node -> peer, msg fields; a/b = k/term, c = stamp, d = deliver ticks
  Deliver,     // peer -> node (node is the receiver)
  DropFaulty,  // delivery to a faulty node, message lost
  Inject,      // environment injection; a = count, b = term count
  FakeInject,  // remainder tokens re-entering; a = count, b = term count
  Start,       // synthetic time-0 wake-up
  Toggle,      // fragile node status flip; a = 1 if now faulty
  TeamForm,    // a = teams formed, b = remainder, c = term consumed, d = formation id
  PhaseBegin,  // a = 1 center / 0 arm
  PhaseEnd,    // a = 1 abrupt
  TokChange,   // a = old, b = new (per instance)
  MedsAdd,     // node = primary, peer = mediator, c = channel epoch
  MedsRemove,  // node = primary, peer = mediator, c = channel epoch
  ChanCreate,  // node = utility, a = p1, b = p2, c = channel epoch
  ChanRelease, // node = utility, a = p1, b = p2, c = channel epoch
  Screened,    // relayed message screened; a = tokens lost to the screen
  AppStatus,   // application-level status change; a = status code
  OriginNotify,// trace-tree origin callback; a = token count, d = formation id
  PendingChange// injected-during-phase buffer; a = old, b = new
};

const char* record_kind_name(RecordKind k);

struct LogRecord {
  Tick t = 0;
  std::uint64_t seq = 0;
  RecordKind kind = RecordKind::Send;
  NodeId node = -1;
  Role role = Role::Primary;
  NodeId peer = -1;
  Role peer_role = Role::Primary;
  Instance instance = 0;
  MsgType msg = MsgType::Busy;
  bool has_msg = false;
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;
  std::int64_t d = 0;

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

// The totally ordered event trace of one run. Replaying the same seed and
// config reproduces it byte for byte (asserted by the replay command).
struct ExecutionLog {
  std::string config_json;  // snapshot of the validated run config
  std::uint64_t seed = 0;
  std::vector<LogRecord> records;

  void emit_jsonl(std::ostream& os) const;
  std::string to_jsonl() const;
};

std::string record_jsonl(const LogRecord& r);

// Parses a JSONL log produced by emit_jsonl. Returns nullopt on malformed
// input. Used by `replay` and `check-tables`.
std::optional<ExecutionLog> parse_jsonl(std::istream& is);
std::optional<ExecutionLog> parse_jsonl_file(const std::string& path);

}  // namespace teamform
