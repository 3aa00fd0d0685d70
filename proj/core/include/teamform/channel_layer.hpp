#pragma once

#include <cstdint>
#include <map>
#include <set>

#include "teamform/messages.hpp"

namespace teamform {

// Channel-layer variables of a primary node. `meds` maps each mediator to the
// channel epoch it announced; epochs exist for instrumentation only and the
// protocol never branches on them. A mediator is recorded only after its
// BusyAck was seen, and the whole set empties synchronously on the busy ->
// non-busy transition.
struct PrimaryChannelState {
  std::set<NodeId> busy_acked;
  std::map<NodeId, std::uint64_t> meds;
};

// Channel-layer variables of a utility node. busy_toks is stored sparsely:
// an absent key is the "unknown" state. `upd` orders entries for
// first-come-first-served tie-breaking among equal token counts.
struct UtilityChannelState {
  struct BusyEntry {
    std::int64_t count = 0;
    std::uint8_t colors = 0;
    std::uint64_t upd = 0;
  };
  std::map<NodeId, BusyEntry> busy_toks;
  NodeId chan[2] = {-1, -1};  // exactly zero or two mediated primaries
  std::uint64_t chan_epoch = 0;
  std::map<NodeId, std::int64_t> diff;  // pending ChannelAck balance

  bool has_chan() const { return chan[0] >= 0; }
  bool in_chan(NodeId p) const { return chan[0] == p || chan[1] == p; }
  NodeId chan_peer(NodeId p) const { return chan[0] == p ? chan[1] : chan[0]; }
  std::int64_t diff_of(NodeId p) const {
    auto it = diff.find(p);
    return it == diff.end() ? 0 : it->second;
  }
};

}  // namespace teamform
