#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "teamform/adversary.hpp"
#include "teamform/log.hpp"
#include "teamform/messages.hpp"
#include "teamform/rng.hpp"
#include "teamform/sim_time.hpp"

namespace teamform {

class Simulation;

struct Envelope {
  std::uint64_t id = 0;
  VAddr src;
  VAddr dst;
  Instance instance = 0;
  Msg msg;
  Tick sent = 0;
  SimTime deliver;
};

struct InjectPayload {
  std::int64_t count = 0;
  std::int64_t term = 0;
  std::uint8_t colors = 1;
  Instance instance = 0;
  bool fake = false;
  bool deferred = false;  // phase-buffered tokens re-entering after an
                          // abrupt phase end
};

// Protocol glue: the kernel owns time, links, failures and token accounting;
// everything protocol-specific lives behind this interface.
class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual void on_start(Simulation& sim, NodeId node) = 0;
  virtual void on_inject(Simulation& sim, NodeId node,
                         const InjectPayload& p) = 0;
  virtual void on_deliver(Simulation& sim, const Envelope& env) = 0;
};

// Token conservation ledger. `held` includes remainder tokens waiting in a
// scheduled fake injection; `limbo` collects tokens that rode a message
// dropped at a faulty node or screened away (designed never to happen for
// the gathering protocol, asserted by the audit).
struct Ledger {
  std::int64_t injected = 0;
  std::int64_t injected_fake = 0;  // bookkeeping only, not part of the balance
  std::int64_t deleted = 0;
  std::int64_t held = 0;
  std::int64_t in_transit = 0;
  std::int64_t limbo = 0;

  bool balanced() const {
    return injected == deleted + held + in_transit + limbo;
  }
};

struct SimOptions {
  int n = 0;
  std::uint64_t seed = 0;
  Tick max_time = 0;  // 0 = unlimited
  double epsilon = 1.0;
  std::string config_json;
};

class Simulation {
 public:
  Simulation(SimOptions opt, std::unique_ptr<Adversary> adversary);
  ~Simulation();

  void set_protocol(Protocol* p) { protocol_ = p; }

  int n() const { return opt_.n; }
  SimTime now() const { return now_; }
  const SimOptions& options() const { return opt_; }

  // --- pre-run setup -------------------------------------------------------
  void schedule_start(NodeId node, Tick at);
  void schedule_injection(const InjectionEvent& e);
  void schedule_injection_plan();  // pulls the adversary's plan

  // --- in-activation services (called by the protocol) ---------------------
  // Sends src -> dst. The delay comes from the adversary policy; the delivery
  // time additionally respects per-physical-link FIFO. Sends from faulty
  // nodes abort the run (protocol bug).
  void send(VAddr src, VAddr dst, Instance instance, Msg msg);

  // Remainder tokens re-entering as a fresh injection, ordered strictly
  // before any other pending event at this tick.
  void schedule_fake_injection(NodeId node, Instance instance,
                               std::int64_t count, std::int64_t term,
                               std::uint8_t colors);
  // Tokens buffered during an abruptly ended phase, re-delivered as an
  // injection event of their own right after the retirement.
  void schedule_deferred_injection(NodeId node, Instance instance,
                                   std::int64_t count, std::int64_t term,
                                   std::uint8_t colors);
  // New tokens created by the application mid-run (candidate tokens, TERM
  // tokens); also ordered immediately after the current event.
  void schedule_app_injection(NodeId node, Instance instance,
                              std::int64_t count, std::int64_t term,
                              std::uint8_t colors);

  void note_tok(NodeId node, Instance instance, std::int64_t before,
                std::int64_t after);
  // Tokens injected during a phase are buffered until the phase ends; the
  // buffer is part of the held total for conservation purposes.
  void note_pending(NodeId node, Instance instance, std::int64_t before,
                    std::int64_t after);
  // Returns the formation id.
  std::uint64_t note_team(NodeId node, Instance instance, std::int64_t teams,
                          std::int64_t team_size, std::int64_t term_consumed,
                          std::int64_t remainder);
  void note_screened(VAddr at, VAddr from, Instance instance,
                     std::int64_t tokens_lost);

  void log_event(RecordKind kind, NodeId node, Role role, NodeId peer,
                 Role peer_role, Instance instance, std::int64_t a = 0,
                 std::int64_t b = 0, std::int64_t c = 0, std::int64_t d = 0);

  Rng& node_rng(NodeId node) { return node_rngs_[node]; }
  Rng& adversary_rng() { return adv_rng_; }

  bool faulty(NodeId node) const { return faulty_[node]; }
  bool fragile(NodeId node) const { return fragile_[node]; }
  const std::vector<bool>& faulty_mask() const { return faulty_; }
  const std::vector<NodeId>& fragile_set() const { return fragile_ids_; }

  void abort_run(const std::string& reason);

  // --- run ------------------------------------------------------------------
  // Drains the event queue (or stops at max_time). Returns false if aborted.
  bool run();

  // True iff there is no pending event, nothing in transit and zero tokens.
  // Between events this is exactly the quiescence predicate.
  bool is_quiescent() const {
    return deliveries_pending_ == 0 && held_tok_ == 0 && fake_pending_ == 0 &&
           pending_buf_ == 0 && transit_tok_ == 0;
  }

  bool settled() const { return settled_; }
  bool censored() const { return censored_; }
  bool aborted() const { return aborted_; }
  const std::string& abort_reason() const { return abort_reason_; }

  Ledger ledger() const {
    Ledger l = ledger_;
    l.held = held_tok_ + fake_pending_ + pending_buf_;
    l.in_transit = transit_tok_;
    return l;
  }

  ExecutionLog& log() { return log_; }
  const ExecutionLog& log() const { return log_; }
  std::vector<LogRecord>& records() { return log_.records; }

  // Manual stepping, used by kernel-level tests.
  bool step();
  bool queue_empty() const { return queue_.empty(); }
  std::int64_t physical_tokens(NodeId node) const { return phys_tok_[node]; }

  // Exposed for tests that drive toggles directly.
  bool toggle_status(NodeId node, Tick at, std::string* error = nullptr);

 private:
  struct Event {
    SimTime at;
    enum Kind : std::uint8_t { Deliver, Inject, FakeInject, Start } kind;
    NodeId node = -1;
    std::uint64_t envelope = 0;
    InjectPayload payload;
  };
  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      return b.at < a.at;
    }
  };

  std::uint64_t next_strided_seq() { return seq_next_ += kSeqStride; }
  std::uint64_t next_chained_seq();
  void dispatch(const Event& e);
  void process_gap(Tick lo, Tick hi);
  Tick link_floor(NodeId src, NodeId dst) const;

  SimOptions opt_;
  std::unique_ptr<Adversary> adversary_;
  Protocol* protocol_ = nullptr;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::unordered_map<std::uint64_t, Envelope> in_flight_;
  std::unordered_map<std::uint64_t, Tick> link_last_;  // FIFO floors

  std::vector<Rng> node_rngs_;
  Rng adv_rng_;

  std::vector<bool> fragile_;
  std::vector<bool> faulty_;
  std::vector<NodeId> fragile_ids_;
  std::vector<std::int64_t> phys_tok_;  // per physical node, all instances

  SimTime now_;
  Tick last_event_ticks_ = 0;
  std::uint64_t seq_next_ = 0;
  Tick chain_tick_ = -1;
  std::uint64_t chain_seq_ = 0;
  std::uint64_t envelope_next_ = 0;
  std::uint64_t formation_next_ = 0;

  std::int64_t deliveries_pending_ = 0;
  std::int64_t held_tok_ = 0;
  std::int64_t transit_tok_ = 0;
  std::int64_t fake_pending_ = 0;
  std::int64_t pending_buf_ = 0;
  Ledger ledger_;

  bool settled_ = false;
  bool censored_ = false;
  bool aborted_ = false;
  std::string abort_reason_;

  ExecutionLog log_;
};

}  // namespace teamform
