#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "teamform/messages.hpp"
#include "teamform/rng.hpp"
#include "teamform/sim_time.hpp"

namespace teamform {

enum class PolicyKind : std::uint8_t {
  UniformRandom,
  ConstantMaxDelay,
  Scripted,
  AntiGatherHeuristic,
};

const char* policy_name(PolicyKind k);
bool policy_from_name(const std::string& s, PolicyKind& out);

// One environment injection. node < 0 means "any node non-faulty at time t",
// resolved by the policy when the injection fires.
struct InjectionEvent {
  Tick t = 0;
  NodeId node = -1;
  std::int64_t count = 1;
  std::int64_t term = 0;
  Instance instance = 0;
  std::uint8_t colors = 1;
};

struct DelayQuery {
  VAddr src;
  VAddr dst;
  Tick now = 0;
  bool src_busy = false;
  bool dst_busy = false;
  MsgType msg = MsgType::Busy;
};

struct ToggleDecision {
  Tick at = 0;
  std::vector<NodeId> nodes;
};

// Adversarial policy: fragile-set choice, per-message delays, the injection
// schedule, and status toggles at quiescent gaps. Policies are pure functions
// of the observable history (delivered through the query structs) and their
// own seeded stream; they never see node RNG state.
class Adversary {
 public:
  virtual ~Adversary() = default;

  // |F| <= n - ceil(epsilon * n); all members start faulty.
  virtual std::vector<NodeId> choose_fragile(int n, double epsilon, Rng& rng);

  // Delay in ticks, in (0, kTicksPerUnit]. The kernel enforces FIFO on top.
  virtual Tick delay(const DelayQuery& q, Rng& rng) = 0;

  virtual std::vector<InjectionEvent> injection_plan() const { return plan_; }

  virtual NodeId resolve_any(Tick t, const std::vector<bool>& faulty, Rng& rng);

  // Consulted once per quiescent gap [lo, hi) between consecutive events.
  // Returns the toggle time (must lie strictly inside the gap) and the
  // fragile nodes to flip; empty means no toggles.
  virtual ToggleDecision toggles(Tick lo, Tick hi,
                                 const std::vector<bool>& fragile,
                                 const std::vector<bool>& faulty, Rng& rng);

  void set_injection_plan(std::vector<InjectionEvent> plan) {
    plan_ = std::move(plan);
  }
  void set_toggling(bool on) { toggling_ = on; }
  bool toggling() const { return toggling_; }

 protected:
  std::vector<InjectionEvent> plan_;
  bool toggling_ = false;
};

class UniformRandomPolicy : public Adversary {
 public:
  Tick delay(const DelayQuery& q, Rng& rng) override;
};

class ConstantMaxDelayPolicy : public Adversary {
 public:
  Tick delay(const DelayQuery& q, Rng& rng) override;
};

// Stress policy: maximally delays traffic between currently-busy endpoints to
// starve gathering, and spreads "any" injections round-robin over distinct
// nodes. Deliberately hostile, not claimed worst-case.
class AntiGatherPolicy : public Adversary {
 public:
  Tick delay(const DelayQuery& q, Rng& rng) override;
  NodeId resolve_any(Tick t, const std::vector<bool>& faulty,
                     Rng& rng) override;

 private:
  NodeId next_target_ = 0;
};

// Replays a recorded decision list verbatim: per-send delays in send order,
// a fixed injection schedule, and toggles keyed by quiescent-gap ordinal.
class ScriptedPolicy : public Adversary {
 public:
  struct Script {
    std::vector<Tick> delays;  // consumed in send order
    std::vector<InjectionEvent> injections;
    struct ToggleEntry {
      int gap_index = 0;
      NodeId node = 0;
    };
    std::vector<ToggleEntry> toggles;
    std::vector<NodeId> fragile;
  };

  explicit ScriptedPolicy(Script script);

  // Parses the documented JSON schema. Returns nullptr and fills `error` on
  // schema violations.
  static std::unique_ptr<ScriptedPolicy> from_json(const std::string& text,
                                                   std::string& error);

  std::vector<NodeId> choose_fragile(int n, double epsilon, Rng& rng) override;
  Tick delay(const DelayQuery& q, Rng& rng) override;
  ToggleDecision toggles(Tick lo, Tick hi, const std::vector<bool>& fragile,
                         const std::vector<bool>& faulty, Rng& rng) override;

  bool exhausted() const { return next_delay_ >= script_.delays.size(); }

 private:
  Script script_;
  std::size_t next_delay_ = 0;
  int gap_counter_ = 0;
};

std::unique_ptr<Adversary> make_policy(PolicyKind kind);

}  // namespace teamform
