#pragma once

#include <memory>
#include <string>
#include <vector>

#include "teamform/apps.hpp"
#include "teamform/checkers.hpp"
#include "teamform/config.hpp"
#include "teamform/kernel.hpp"
#include "teamform/metrics.hpp"

namespace teamform {

struct RunResult {
  bool ok = false;
  std::string error;
  bool settled = false;
  bool censored = false;
  Ledger ledger;
  std::int64_t teams = 0;
  std::int64_t sigma_effective = 0;
  MetricsRow metrics;
  std::vector<Violation> violations;
  std::vector<ReactionSample> reactions;
  LeOutcome le;
  VtfOutcome vtf;
  std::vector<DtcAlarm> alarms;
  std::shared_ptr<ExecutionLog> log;
  std::shared_ptr<PuGraph> graph;
  std::vector<TfParams> instances;

  CheckContext check_context() const {
    CheckContext ctx;
    ctx.n = n;
    ctx.instances = instances;
    ctx.graph = graph.get();
    ctx.fragile = fragile;
    ctx.trace_reports = trace_reports;
    return ctx;
  }
  int n = 0;
  std::vector<NodeId> fragile;
  bool trace_reports = false;
};

// Executes one seeded run of any experiment kind (except "lowerbound", which
// has its own driver) and evaluates metrics plus, when enabled, the full
// checker suite.
RunResult run_experiment(const RunConfig& cfg);

// Instance layout and effective team size for a config, as run_experiment
// would build them; lets offline commands rebuild a CheckContext from a log's
// embedded config.
std::vector<TfParams> instances_for_config(const RunConfig& cfg,
                                           std::int64_t& sigma_out);

// Re-executes from the embedded config and compares serialized logs byte for
// byte; on mismatch returns the first divergent record index.
struct ReplayVerdict {
  bool identical = false;
  std::int64_t first_divergence = -1;
  std::string error;
  std::int64_t violations = 0;
};
ReplayVerdict replay_log(const ExecutionLog& original);

}  // namespace teamform
