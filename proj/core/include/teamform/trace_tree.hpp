#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <utility>
#include <vector>

#include "teamform/kernel.hpp"
#include "teamform/messages.hpp"

namespace teamform {

class TfDriver;

// Per-hop counter bookkeeping enabling backward notification from a forming
// node to each member token's injection node. Counters are per physical port
// (one pair per neighbor); a token batch on the wire carries a single stamp,
// keeping messages within the usual size discipline. Record storage is
// recycled once a formation report has passed through.
class TraceTree {
 public:
  struct Record {
    Instance instance = 0;
    std::uint8_t color = 0;
    bool term = false;
    bool origin = false;
    bool held = false;
    NodeId in_peer = -1;  // -1 when injected here
    std::uint64_t in_counter = 0;
    NodeId out_peer = -1;
    std::uint64_t out_counter = 0;
  };
  struct PortCounters {
    std::uint64_t incoming = 0;
    std::uint64_t outgoing = 0;
  };
  struct TeamPick {
    std::int64_t term = 0;
    std::vector<std::uint32_t> members;
  };

  TraceTree(int n, bool reports_enabled);

  void set_driver(TfDriver* d) { driver_ = d; }
  bool reports_enabled() const { return reports_enabled_; }

  void add_origins(NodeId node, Instance inst, std::uint8_t color,
                   std::int64_t count, std::int64_t term);

  // Moves the holder's `count` oldest held tokens of the given color out on
  // the port toward `peer` and returns the stamp to ride with the batch.
  // Holdings are keyed by virtual role: a mediator's in-relay tokens never
  // mix with the same physical node's primary-held ones. Port counters stay
  // per physical port.
  std::uint64_t record_send(VAddr holder, NodeId peer, Instance inst,
                            std::uint8_t color, std::int64_t count,
                            std::int64_t term);

  // Verifies the stamp against the port's incoming counter (a mismatch means
  // FIFO or bookkeeping corruption and aborts the run) and registers `count`
  // newly arrived tokens.
  void record_receive(Simulation& sim, VAddr holder, NodeId peer,
                      Instance inst, std::uint8_t color, std::int64_t count,
                      std::int64_t term, std::uint64_t stamp);

  TeamPick pick_team(NodeId node, Instance inst, std::int64_t count_c0,
                     std::int64_t count_c1);

  // Emits the backward notification chain for one formation. Reports to the
  // same predecessor are batched into one message; origin tokens at the
  // forming node itself fire the callback immediately.
  void notify_origins(Simulation& sim, NodeId former, Instance inst,
                      const TeamPick& team, std::uint64_t formation_id);

  void on_report(Simulation& sim, const Envelope& env);

  std::int64_t held_count(NodeId node, Instance inst, std::uint8_t color) const;
  std::int64_t held_term(NodeId node, Instance inst) const;
  std::int64_t live_records() const { return live_records_; }
  const PortCounters& port(NodeId node, NodeId peer) const;

 private:
  std::uint32_t alloc_record();
  void free_record(std::uint32_t id);
  std::deque<std::uint32_t>& held_fifo(VAddr holder, Instance inst,
                                       std::uint8_t color);

  int n_ = 0;
  bool reports_enabled_ = false;
  TfDriver* driver_ = nullptr;
  std::vector<Record> records_;
  std::vector<std::uint32_t> free_;
  std::int64_t live_records_ = 0;
  std::vector<std::map<NodeId, PortCounters>> ports_;
  // held token queues per (node, instance, color), oldest first
  std::vector<std::map<std::uint32_t, std::deque<std::uint32_t>>> held_;
  // forwarded records by (out_peer, out_counter), for report matching
  std::vector<std::map<std::pair<NodeId, std::uint64_t>, std::uint32_t>> fwd_;
};

}  // namespace teamform
