#include "teamform/log.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace teamform {

const char* record_kind_name(RecordKind k) {
  switch (k) {
    case RecordKind::Send: return "send";
    case RecordKind::Deliver: return "deliver";
    case RecordKind::DropFaulty: return "drop_faulty";
    case RecordKind::Inject: return "inject";
    case RecordKind::FakeInject: return "fake_inject";
    case RecordKind::Start: return "start";
    case RecordKind::Toggle: return "toggle";
    case RecordKind::TeamForm: return "team_form";
    case RecordKind::PhaseBegin: return "phase_begin";
    case RecordKind::PhaseEnd: return "phase_end";
    case RecordKind::TokChange: return "tok_change";
    case RecordKind::MedsAdd: return "meds_add";
    case RecordKind::MedsRemove: return "meds_remove";
    case RecordKind::ChanCreate: return "chan_create";
    case RecordKind::ChanRelease: return "chan_release";
    case RecordKind::Screened: return "screened";
    case RecordKind::AppStatus: return "app_status";
    case RecordKind::OriginNotify: return "origin_notify";
    case RecordKind::PendingChange: return "pending_change";
  }
  return "?";
}

namespace {

RecordKind kind_from_name(const std::string& s, bool& ok) {
  for (int i = 0; i <= static_cast<int>(RecordKind::PendingChange); ++i) {
    auto k = static_cast<RecordKind>(i);
    if (s == record_kind_name(k)) return k;
  }
  ok = false;
  return RecordKind::Send;
}

MsgType msg_from_name(const std::string& s, bool& ok) {
  for (int i = 0; i <= static_cast<int>(MsgType::LeaderAnnounce); ++i) {
    auto m = static_cast<MsgType>(i);
    if (s == msg_name(m)) return m;
  }
  ok = false;
  return MsgType::Busy;
}

// `t` round-trips through the reduced rational string exactly.
Tick ticks_from_rational(const std::string& s, bool& ok) {
  std::int64_t num = 0, den = 1;
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      num = std::stoll(s);
    } else {
      num = std::stoll(s.substr(0, slash));
      den = std::stoll(s.substr(slash + 1));
    }
  } catch (...) {
    ok = false;
    return 0;
  }
  if (den <= 0 || kTicksPerUnit % den != 0) {
    ok = false;
    return 0;
  }
  return num * (kTicksPerUnit / den);
}

}  // namespace

std::string record_jsonl(const LogRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = rational_string(r.t);
  j["seq"] = r.seq;
  j["kind"] = record_kind_name(r.kind);
  j["node"] = vaddr_string({r.node, r.role});
  if (r.peer >= 0) j["peer"] = vaddr_string({r.peer, r.peer_role});
  if (r.has_msg) j["msg_type"] = msg_name(r.msg);
  if (r.instance != 0) j["inst"] = r.instance;
  nlohmann::ordered_json detail;
  if (r.a != 0) detail["a"] = r.a;
  if (r.b != 0) detail["b"] = r.b;
  if (r.c != 0) detail["c"] = r.c;
  if (r.d != 0) detail["d"] = r.d;
  j["tokens"] = r.kind == RecordKind::Send || r.kind == RecordKind::Deliver ||
                        r.kind == RecordKind::DropFaulty
                    ? (r.has_msg && r.msg == MsgType::Transport ? r.a : 0)
                    : r.a;
  if (!detail.empty()) j["detail"] = detail;
  return j.dump();
}

void ExecutionLog::emit_jsonl(std::ostream& os) const {
  nlohmann::ordered_json header;
  header["kind"] = "header";
  header["seed"] = seed;
  header["config"] =
      config_json.empty() ? nlohmann::json::object()
                          : nlohmann::json::parse(config_json);
  os << header.dump() << '\n';
  for (const auto& r : records) os << record_jsonl(r) << '\n';
}

std::string ExecutionLog::to_jsonl() const {
  std::ostringstream os;
  emit_jsonl(os);
  return os.str();
}

std::optional<ExecutionLog> parse_jsonl(std::istream& is) {
  ExecutionLog log;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    if (first) {
      first = false;
      if (j.value("kind", "") != "header") return std::nullopt;
      log.seed = j.value("seed", std::uint64_t{0});
      if (j.contains("config")) log.config_json = j["config"].dump();
      continue;
    }
    LogRecord r;
    bool ok = true;
    r.t = ticks_from_rational(j.value("t", "0"), ok);
    r.seq = j.value("seq", std::uint64_t{0});
    r.kind = kind_from_name(j.value("kind", ""), ok);
    auto node = j.value("node", "");
    if (node.size() < 2) return std::nullopt;
    r.role = node[0] == 'u' ? Role::Utility : Role::Primary;
    r.node = static_cast<NodeId>(std::stol(node.substr(1)));
    if (j.contains("peer")) {
      auto peer = j["peer"].get<std::string>();
      r.peer_role = peer[0] == 'u' ? Role::Utility : Role::Primary;
      r.peer = static_cast<NodeId>(std::stol(peer.substr(1)));
    }
    if (j.contains("msg_type")) {
      r.has_msg = true;
      r.msg = msg_from_name(j["msg_type"].get<std::string>(), ok);
    }
    r.instance = j.value("inst", Instance{0});
    if (j.contains("detail")) {
      const auto& d = j["detail"];
      r.a = d.value("a", std::int64_t{0});
      r.b = d.value("b", std::int64_t{0});
      r.c = d.value("c", std::int64_t{0});
      r.d = d.value("d", std::int64_t{0});
    }
    if (!ok) return std::nullopt;
    log.records.push_back(r);
  }
  if (first) return std::nullopt;
  return log;
}

std::optional<ExecutionLog> parse_jsonl_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) return std::nullopt;
  return parse_jsonl(f);
}

}  // namespace teamform
