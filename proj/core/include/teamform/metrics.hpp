#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teamform/checkers.hpp"
#include "teamform/log.hpp"

namespace teamform {

struct ReactionSample {
  Tick start = 0;      // system-wide token count first reached the team size
  Tick formed_at = 0;  // first formation inside the window
  bool censored = false;
  Tick duration() const { return formed_at - start; }
};

// One sample per maximal interval during which the system-wide token count
// (held + in transit + pending remainders) stays at or above the team size.
// Windows with no formation by the end of the log are flagged censored.
std::vector<ReactionSample> reaction_samples(const ExecutionLog& log,
                                             const CheckContext& ctx,
                                             std::int64_t sigma,
                                             Instance instance = 0);

struct MessageCounts {
  std::int64_t total = 0;
  std::int64_t channel_control = 0;  // busy/ack/update/channel traffic
  std::int64_t relayed = 0;          // principal messages (per hop)
  std::int64_t other = 0;            // trace reports, announcements
};

// count_piggybacked_once merges same-activation envelopes to one destination
// into a single counted message (the load metric only; the wire always
// carries separate envelopes).
MessageCounts message_counts(const ExecutionLog& log,
                             bool count_piggybacked_once = false);

double message_load(const ExecutionLog& log, std::int64_t injected,
                    bool count_piggybacked_once = false);

struct MetricsRow {
  std::uint64_t seed = 0;
  int n = 0;
  std::int64_t sigma = 0;
  std::string policy;
  std::int64_t messages_total = 0;
  std::int64_t messages_channel = 0;
  std::int64_t messages_relayed = 0;
  std::int64_t tokens_injected = 0;
  std::int64_t tokens_fake = 0;
  std::int64_t teams = 0;
  double load = 0;
  double reaction_p50 = -1;
  double reaction_p95 = -1;
  std::int64_t reaction_censored = 0;
  std::int64_t violations = 0;

  static std::string csv_header();
  std::string csv_row() const;
};

}  // namespace teamform
