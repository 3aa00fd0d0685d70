#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "teamform/channel_layer.hpp"
#include "teamform/config.hpp"
#include "teamform/kernel.hpp"
#include "teamform/principal_layer.hpp"
#include "teamform/pu_graph.hpp"
#include "teamform/trace_tree.hpp"

namespace teamform {

class TfDriver;

// Application hooks around one or more gathering instances. All callbacks run
// inside the triggering activation.
class TfApp {
 public:
  virtual ~TfApp() = default;
  virtual void on_node_start(Simulation&, TfDriver&, NodeId) {}
  virtual void team_formed(Simulation&, TfDriver&, NodeId, Instance,
                           std::int64_t /*teams*/, std::int64_t /*term*/,
                           std::uint64_t /*formation_id*/) {}
  virtual void transport_received(Simulation&, TfDriver&, NodeId, Instance,
                                  std::int64_t /*count*/,
                                  std::int64_t /*term*/) {}
  virtual void retired_by_transport(Simulation&, TfDriver&, NodeId, Instance) {}
  virtual void origin_notified(Simulation&, TfDriver&, NodeId /*origin*/,
                               Instance, std::uint64_t /*formation_id*/,
                               std::int64_t /*count*/) {}
  virtual void extra_delivery(Simulation&, TfDriver&, const Envelope&) {}
};

struct TfParams {
  Instance instance = 0;
  std::int64_t sigma = 2;
  bool diff_mode = false;  // two-color pairing variant: a team is one token
                           // of each color and transports go cross-color only
};

// One gathering instance: the channel layer (mediated virtual circuits) plus
// the principal layer (phase-based request/response gathering) for all nodes.
class TfInstance {
 public:
  TfInstance(TfParams params, const PuGraph* graph, TraceTree* trace,
             TfDriver* driver);

  const TfParams& params() const { return params_; }
  const PrincipalState& principal(NodeId p) const { return pr_[p]; }
  const PrimaryChannelState& primary_channel(NodeId p) const { return pc_[p]; }
  const UtilityChannelState& utility_channel(NodeId u) const { return uc_[u]; }

  bool busy(NodeId p) const { return pr_[p].tok() > 0; }
  bool can_form(NodeId p) const;

  void handle_injection(Simulation& sim, NodeId p, const InjectPayload& pay);
  void handle_delivery(Simulation& sim, const Envelope& env);

  // State comparison against the factory-fresh image, used by the forgetful
  // checkers. Trace port counters are deliberately not part of this.
  bool node_state_is_initial(NodeId v) const;

 private:
  friend class TfDriver;

  // -- channel layer, primary side -----------------------------------------
  void chan_busy_broadcast(Simulation& sim, NodeId p);
  void chan_tok_increase(Simulation& sim, NodeId p);
  void chan_non_busy(Simulation& sim, NodeId p);
  void chan_on_busy_ack(Simulation& sim, NodeId p, NodeId u);
  void chan_on_channel(Simulation& sim, NodeId p, NodeId u,
                       std::uint64_t epoch);
  void chan_on_no_channel(Simulation& sim, NodeId p, NodeId u,
                          std::uint64_t epoch);
  void chan_on_relayed(Simulation& sim, NodeId p, NodeId u, const Msg& m);

  // -- channel layer, utility side -------------------------------------------
  void util_on_busy(Simulation& sim, NodeId u, NodeId p);
  void util_on_tokens_update(Simulation& sim, NodeId u, NodeId p, const Msg& m);
  void util_on_not_busy(Simulation& sim, NodeId u, NodeId p);
  void util_on_channel_ack(Simulation& sim, NodeId u, NodeId p);
  void util_on_relayed(Simulation& sim, NodeId u, NodeId p, const Msg& m);
  void util_create_channel(Simulation& sim, NodeId u);

  // -- principal layer --------------------------------------------------------
  void principal_channel_added(Simulation& sim, NodeId p, NodeId u);
  void principal_channel_removed(Simulation& sim, NodeId p, NodeId u);
  void principal_on_relayed(Simulation& sim, NodeId p, NodeId u, const Msg& m);
  void check_end_phase(Simulation& sim, NodeId p);
  void begin_new_phase(Simulation& sim, NodeId p);
  void form_teams(Simulation& sim, NodeId p);
  void flush_pending(Simulation& sim, NodeId p);
  void gain_tokens(Simulation& sim, NodeId p, std::uint8_t colors,
                   std::int64_t count, std::int64_t term);
  void send_relayed(Simulation& sim, NodeId p, NodeId u, Msg m);
  void end_phase_log(Simulation& sim, NodeId p, bool abrupt);

  TfParams params_;
  const PuGraph* graph_;
  TraceTree* trace_;
  TfDriver* driver_;
  std::vector<PrincipalState> pr_;
  std::vector<PrimaryChannelState> pc_;
  std::vector<UtilityChannelState> uc_;
  std::uint64_t epoch_next_ = 0;
  std::uint64_t upd_next_ = 0;
  std::uint64_t phase_next_ = 0;
};

// Kernel-facing protocol object: routes events to instances, owns the trace
// bookkeeping, and forwards application hooks.
class TfDriver : public Protocol {
 public:
  TfDriver(const PuGraph* graph, std::vector<TfParams> instances, TfApp* app,
           bool trace_reports);

  void on_start(Simulation& sim, NodeId node) override;
  void on_inject(Simulation& sim, NodeId node, const InjectPayload& p) override;
  void on_deliver(Simulation& sim, const Envelope& env) override;

  void set_faults(const FaultInjection& f) { faults_ = f; }
  const FaultInjection& faults() const { return faults_; }

  // Test hook: pin phase coins (1 center, 0 arm, -1 defer to the node rng).
  using CoinOverride = std::function<int(NodeId, Instance)>;
  void set_phase_coin_override(CoinOverride f) { coin_override_ = std::move(f); }
  bool phase_coin_center(Simulation& sim, NodeId p, Instance i) {
    if (coin_override_) {
      int v = coin_override_(p, i);
      if (v >= 0) return v != 0;
    }
    return sim.node_rng(p).coin();
  }

  TfInstance& instance(Instance i) { return *instances_[i]; }
  const TfInstance& instance(Instance i) const { return *instances_[i]; }
  std::size_t instance_count() const { return instances_.size(); }
  TraceTree& trace() { return trace_; }
  TfApp* app() { return app_; }
  const PuGraph& graph() const { return *graph_; }

  bool all_nodes_initial() const;

 private:
  const PuGraph* graph_;
  TraceTree trace_;
  TfApp* app_;
  FaultInjection faults_;
  CoinOverride coin_override_;
  std::vector<std::unique_ptr<TfInstance>> instances_;
};

}  // namespace teamform
