#pragma once

#include <cstdint>
#include <map>

#include "teamform/messages.hpp"

namespace teamform {

enum class PhaseType : std::int8_t { None = 0, Center = 1, Arm = 2 };

// Principal-layer variables of a primary node. Token counts are kept per
// color (plain instances only ever use color 0); `term` counts TERM-marked
// tokens among the held ones. awaiting/delaying are keyed by mediator and
// their key set always equals the current channel set: entries are created
// and deleted together with channels.
struct PrincipalState {
  std::int64_t tok_c[2] = {0, 0};
  std::int64_t term = 0;
  PhaseType phase = PhaseType::None;
  std::uint64_t phase_id = 0;
  std::map<NodeId, bool> awaiting;
  std::map<NodeId, bool> delaying;
  std::int64_t pending_c[2] = {0, 0};
  std::int64_t pending_term = 0;

  std::int64_t tok() const { return tok_c[0] + tok_c[1]; }
  std::int64_t pending() const { return pending_c[0] + pending_c[1]; }
  std::uint8_t color_mask() const {
    return static_cast<std::uint8_t>((tok_c[0] > 0 ? 1 : 0) |
                                     (tok_c[1] > 0 ? 2 : 0));
  }
  bool all_responses_in() const {
    for (const auto& [u, w] : awaiting)
      if (w) return false;
    return true;
  }
};

}  // namespace teamform
