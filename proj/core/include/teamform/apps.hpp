#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "teamform/tf_machine.hpp"

namespace teamform {

// ---------------------------------------------------------------------------
// Leader election on top of token gathering: every waking node flips a
// candidate coin with probability min(1, c_le ln n / n); candidates inject
// one token and the gathering runs with the derived team size. The node that
// performs a formation is elected. Termination detection marks everyone else
// not-leader, either through the single TERM token riding the accumulation
// property or through sigma-1 regenerating TERM tokens.
// ---------------------------------------------------------------------------

enum class LeStatus : std::int8_t { Undecided = 0, Leader = 1, NotLeader = 2 };

struct LeConfig {
  int n = 0;
  double epsilon = 0.1;  // in (0, 1/2)
  double c_le = 14.0;
  bool term_tokens = true;  // false: accumulation-based single TERM token
  bool explicit_mode = false;
};

std::int64_t le_sigma(const LeConfig& cfg);
double le_candidate_probability(const LeConfig& cfg);

struct LeOutcome {
  std::vector<LeStatus> status;
  std::vector<NodeId> leader_port;  // explicit mode: port toward the leader
  std::int64_t candidates = 0;      // realized candidate-token count T
  std::int64_t leaders = 0;
  std::int64_t formations = 0;
  std::int64_t announcements = 0;
  bool accumulator_is_leader = false;
  NodeId leader = -1;
};

class LeApp : public TfApp {
 public:
  explicit LeApp(LeConfig cfg);

  void on_node_start(Simulation&, TfDriver&, NodeId) override;
  void team_formed(Simulation&, TfDriver&, NodeId, Instance, std::int64_t,
                   std::int64_t, std::uint64_t) override;
  void transport_received(Simulation&, TfDriver&, NodeId, Instance,
                          std::int64_t, std::int64_t) override;
  void retired_by_transport(Simulation&, TfDriver&, NodeId, Instance) override;
  void extra_delivery(Simulation&, TfDriver&, const Envelope&) override;

  // Call after the run drained to fold in the accumulation-based verdict.
  LeOutcome finish(const Simulation& sim, const TfDriver& driver);

  std::int64_t sigma() const { return sigma_; }

 private:
  void set_status(Simulation& sim, NodeId v, LeStatus st);

  LeConfig cfg_;
  std::int64_t sigma_;
  std::uint64_t cand_threshold_;
  std::vector<LeStatus> status_;
  std::vector<NodeId> leader_port_;
  std::int64_t candidates_ = 0;
  std::int64_t formations_ = 0;
  std::int64_t leaders_ = 0;
  std::int64_t announcements_ = 0;
  NodeId leader_ = -1;
  bool term_seeded_ = false;
};

// ---------------------------------------------------------------------------
// Vector team formation: one plain gathering instance per palette color plus
// a binary combining tree of two-color pairing instances. A color-i team
// emits a color-i super-token; pairing instances combine super-tokens two
// palette branches at a time until the root pair completes one vector team.
// ---------------------------------------------------------------------------

struct VtfConfig {
  std::vector<std::int64_t> sigma_vec;  // per palette color, size m >= 1
};

struct VtfOutcome {
  std::int64_t vector_teams = 0;
  std::vector<std::int64_t> color_teams;      // level-0 formations per color
  std::vector<std::int64_t> pair_formations;  // per combining instance
};

class VtfApp : public TfApp {
 public:
  explicit VtfApp(VtfConfig cfg);

  // Instance layout: [0, m_padded) plain per-color instances, then one
  // pairing instance per internal tree node, root last.
  std::vector<TfParams> instance_params() const;
  Instance instance_for_color(int color) const { return color; }

  void team_formed(Simulation&, TfDriver&, NodeId, Instance, std::int64_t,
                   std::int64_t, std::uint64_t) override;

  const VtfOutcome& outcome() const { return out_; }
  int padded_colors() const { return m_padded_; }

 private:
  struct Slot {
    Instance parent = 0;
    std::uint8_t side = 0;  // color bit within the parent pair
    bool real = false;      // has any live palette color beneath it
  };
  void emit_super_token(Simulation& sim, NodeId node, Instance from,
                        std::int64_t count);

  VtfConfig cfg_;
  int m_real_ = 0;
  int m_padded_ = 0;
  Instance root_ = 0;
  std::vector<Slot> slots_;  // indexed by instance id
  VtfOutcome out_;
};

// ---------------------------------------------------------------------------
// Distributed trigger counting: each trigger is one token, the alarm is the
// first formation with the threshold as team size.
// ---------------------------------------------------------------------------

struct DtcAlarm {
  NodeId node = -1;
  Tick at = 0;
};

class DtcApp : public TfApp {
 public:
  void team_formed(Simulation& sim, TfDriver&, NodeId node, Instance,
                   std::int64_t teams, std::int64_t, std::uint64_t) override {
    for (std::int64_t i = 0; i < teams; ++i)
      alarms_.push_back({node, sim.now().ticks});
  }
  const std::vector<DtcAlarm>& alarms() const { return alarms_; }

 private:
  std::vector<DtcAlarm> alarms_;
};

}  // namespace teamform
