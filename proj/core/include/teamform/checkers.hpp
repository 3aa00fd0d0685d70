#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teamform/log.hpp"
#include "teamform/pu_graph.hpp"
#include "teamform/sim_time.hpp"
#include "teamform/tf_machine.hpp"

namespace teamform {

struct Violation {
  std::string check;
  std::uint64_t seq = 0;  // offending log record index
  std::string detail;
};

struct CheckContext {
  int n = 0;
  std::vector<TfParams> instances;
  const PuGraph* graph = nullptr;
  std::vector<NodeId> fragile;
  bool expect_limbo_free = true;
  bool trace_reports = false;
  // Channel-setup window length asserted by the service checker. The
  // four-unit figure is the stated one; it is refutable (see the acceptance
  // suite), so probes may widen it to measure the actual lag.
  Tick setup_window = 4 * kTicksPerUnit;
};

// Pair-state conformance: every (primary, utility) pair's joint state and
// every transition is checked against the reachable-configuration table and
// its incidence matrix, with in-flight link contents matched against the
// per-row regular expressions. Pairs are suspended while either endpoint is
// faulty; suspension boundaries (always quiescent) must sit exactly at the
// initial configuration.
std::vector<Violation> check_pair_conformance(const ExecutionLog& log,
                                              const CheckContext& ctx);

// Everything else: FIFO and delay bounds, token conservation replay audit,
// quiescent toggling, channel-layer service assertions (operational implies
// busy, setup window, teardown sync, relay freshness, degree bound), phase
// duration, transport-target-busy, all-or-nothing transports, team safety,
// potential monotonicity, forgetful state at quiescent times, accumulation
// of leftovers, and trace-tree shape/completeness when reports ran.
std::vector<Violation> check_invariants(const ExecutionLog& log,
                                        const CheckContext& ctx);

// Convenience: both sweeps concatenated.
std::vector<Violation> run_all_checkers(const ExecutionLog& log,
                                        const CheckContext& ctx);

std::string describe(const std::vector<Violation>& vs, std::size_t limit = 10);

// Potential-function series over a log, one point per record boundary.
struct PotentialPoint {
  std::uint64_t seq = 0;
  Tick t = 0;
  std::int64_t psi = 0;
  std::int64_t psi_hat = 0;
  std::int64_t tokens_in_system = 0;
  bool team_formed_here = false;
  bool transport_retirement_here = false;
};
std::vector<PotentialPoint> potential_series(const ExecutionLog& log,
                                             const CheckContext& ctx,
                                             Instance instance = 0);

}  // namespace teamform
