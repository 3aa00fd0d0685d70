// Batch experiment driver: seeded runs, seed sweeps, log replay, offline
// conformance checking and the lower-bound Monte-Carlo harness.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "teamform/experiment.hpp"
#include "teamform/lowerbound.hpp"

using namespace teamform;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitConfig = 2;

std::string out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("TFSIM_OUT")) return env;
  return ".";
}

std::optional<RunConfig> load_config(const std::string& path,
                                     std::string& err) {
  std::ifstream f(path);
  if (!f) {
    err = "cannot open config file " + path;
    return std::nullopt;
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str(), err);
}

void write_log(const ExecutionLog& log, const std::string& path) {
  std::ofstream f(path);
  log.emit_jsonl(f);
}

int summarize(const RunResult& r, bool print_violations) {
  if (!r.ok) {
    std::cerr << "run aborted: " << r.error << "\n";
    return kExitViolations;
  }
  std::cout << "teams=" << r.teams << " injected=" << r.ledger.injected
            << " messages=" << r.metrics.messages_total
            << " load=" << r.metrics.load << " settled=" << (r.settled ? 1 : 0)
            << " censored=" << (r.censored ? 1 : 0)
            << " violations=" << r.violations.size() << "\n";
  if (!r.violations.empty() && print_violations)
    std::cerr << describe(r.violations);
  return r.violations.empty() ? kExitOk : kExitViolations;
}

struct SweepStats {
  std::int64_t runs = 0, violations = 0, aborted = 0, censored = 0, teams = 0;
  double load_sum = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"team formation simulator"};
  app.require_subcommand(1);

  std::string config_path, out_flag, log_path;
  std::uint64_t seed_flag = 0;
  bool seed_set = false, log_events = false;
  std::string policy_flag;
  std::string seeds_range;
  int threads = static_cast<int>(std::thread::hardware_concurrency());

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* copt = cmd->add_option("--config", config_path,
                                 "JSON run configuration");
    if (needs_config) copt->required();
    cmd->add_option("--out", out_flag,
                    "output directory (or TFSIM_OUT, default .)");
    cmd->add_flag("--log-events", log_events,
                  "write the full event log as JSONL");
    cmd->add_option("--policy", policy_flag, "override the adversary policy");
    auto* s = cmd->add_option("--seed", seed_flag, "override the run seed");
    s->each([&](const std::string&) { seed_set = true; });
  };

  std::string overlay_path;
  auto* run_cmd = app.add_subcommand("run", "execute one seeded run");
  add_common(run_cmd, true);
  run_cmd->add_option("--dump-overlay", overlay_path,
                      "write the bipartite overlay adjacency as JSONL");

  auto* sweep_cmd = app.add_subcommand("sweep", "fan a config across seeds");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--seeds", seeds_range, "inclusive range lo..hi")
      ->required();
  sweep_cmd->add_option("--threads", threads, "worker threads");

  auto* replay_cmd =
      app.add_subcommand("replay", "re-execute a log and compare byte-exactly");
  replay_cmd->add_option("--log", log_path, "JSONL event log")->required();

  auto* check_cmd = app.add_subcommand(
      "check-tables", "offline pair-state conformance over a log");
  check_cmd->add_option("--log", log_path, "JSONL event log")->required();

  auto* lb_cmd =
      app.add_subcommand("lowerbound", "influence-component Monte Carlo");
  add_common(lb_cmd, true);

  CLI11_PARSE(app, argc, argv);

  auto apply_overrides = [&](RunConfig& cfg) -> bool {
    if (seed_set) cfg.seed = seed_flag;
    if (!policy_flag.empty()) {
      if (!policy_from_name(policy_flag, cfg.policy)) {
        std::cerr << "unknown policy '" << policy_flag << "'\n";
        return false;
      }
    }
    return true;
  };

  if (run_cmd->parsed()) {
    std::string err;
    auto cfg = load_config(config_path, err);
    if (!cfg) {
      std::cerr << err << "\n";
      return kExitConfig;
    }
    if (!apply_overrides(*cfg)) return kExitConfig;
    auto r = run_experiment(*cfg);
    const std::string dir = out_dir(out_flag);
    if (!overlay_path.empty() && r.graph) {
      std::ofstream ov(overlay_path);
      dump_adjacency(*r.graph, ov);
    }
    if (r.log && log_events)
      write_log(*r.log, dir + "/log-" + std::to_string(cfg->seed) + ".jsonl");
    std::ofstream csv(dir + "/metrics.csv", std::ios::app);
    if (csv.tellp() == 0) csv << MetricsRow::csv_header() << "\n";
    csv << r.metrics.csv_row() << "\n";
    return summarize(r, true);
  }

  if (sweep_cmd->parsed()) {
    std::string err;
    auto cfg = load_config(config_path, err);
    if (!cfg) {
      std::cerr << err << "\n";
      return kExitConfig;
    }
    if (!apply_overrides(*cfg)) return kExitConfig;
    auto dots = seeds_range.find("..");
    if (dots == std::string::npos) {
      std::cerr << "--seeds expects lo..hi\n";
      return kExitConfig;
    }
    const std::uint64_t lo = std::stoull(seeds_range.substr(0, dots));
    const std::uint64_t hi = std::stoull(seeds_range.substr(dots + 2));
    if (hi < lo) {
      std::cerr << "--seeds expects lo..hi\n";
      return kExitConfig;
    }
    const std::size_t total = hi - lo + 1;
    std::vector<MetricsRow> rows(total);
    std::vector<std::uint8_t> bad(total, 0);
    SweepStats stats;
    std::mutex stats_mu;
    std::atomic<std::uint64_t> next{0};
    const int workers =
        std::max(1, std::min<int>(threads, static_cast<int>(total)));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::uint64_t i = next.fetch_add(1);
          if (i >= total) return;
          RunConfig rc = *cfg;
          rc.seed = lo + i;
          auto r = run_experiment(rc);
          rows[i] = r.metrics;
          bad[i] = !r.ok || !r.violations.empty();
          std::lock_guard<std::mutex> lk(stats_mu);
          ++stats.runs;
          stats.violations += static_cast<std::int64_t>(r.violations.size());
          stats.aborted += r.ok ? 0 : 1;
          stats.censored += r.censored ? 1 : 0;
          stats.teams += r.teams;
          if (r.metrics.load > 0) stats.load_sum += r.metrics.load;
        }
      });
    }
    for (auto& t : pool) t.join();
    const std::string dir = out_dir(out_flag);
    std::ofstream csv(dir + "/metrics.csv", std::ios::app);
    if (csv.tellp() == 0) csv << MetricsRow::csv_header() << "\n";
    for (const auto& row : rows) csv << row.csv_row() << "\n";
    bool any_bad = false;
    for (auto b : bad) any_bad |= b != 0;
    std::cout << "sweep: runs=" << stats.runs << " teams=" << stats.teams
              << " mean_load=" << (stats.runs ? stats.load_sum / stats.runs : 0)
              << " censored=" << stats.censored
              << " aborted=" << stats.aborted
              << " violations=" << stats.violations << "\n";
    return any_bad ? kExitViolations : kExitOk;
  }

  if (replay_cmd->parsed()) {
    auto log = parse_jsonl_file(log_path);
    if (!log) {
      std::cerr << "cannot parse log " << log_path << "\n";
      return kExitConfig;
    }
    auto verdict = replay_log(*log);
    if (!verdict.error.empty()) {
      std::cerr << verdict.error << "\n";
      return kExitConfig;
    }
    if (!verdict.identical) {
      std::cout << "divergence at record " << verdict.first_divergence << "\n";
      return kExitViolations;
    }
    std::cout << "identical, " << verdict.violations << " violations\n";
    return verdict.violations == 0 ? kExitOk : kExitViolations;
  }

  if (check_cmd->parsed()) {
    auto log = parse_jsonl_file(log_path);
    if (!log) {
      std::cerr << "cannot parse log " << log_path << "\n";
      return kExitConfig;
    }
    std::string err;
    auto cfg = parse_run_config(log->config_json, err);
    if (!cfg) {
      std::cerr << "embedded config invalid: " << err << "\n";
      return kExitConfig;
    }
    cfg->seed = log->seed;
    CheckContext ctx;
    ctx.n = cfg->n;
    std::int64_t sigma = 0;
    ctx.instances = instances_for_config(*cfg, sigma);
    auto graph = PuGraph::build(cfg->n, cfg->c, cfg->seed);
    ctx.graph = &graph;
    ctx.trace_reports = cfg->trace_reports;
    // fragile members announce themselves in the time-zero toggle records
    for (const auto& r : log->records) {
      if (r.kind != RecordKind::Toggle || r.t > 0) break;
      ctx.fragile.push_back(r.node);
    }
    ctx.expect_limbo_free = cfg->faults.none();
    auto violations = run_all_checkers(*log, ctx);
    std::cout << violations.size() << " violations\n";
    if (!violations.empty()) std::cerr << describe(violations, 20);
    return violations.empty() ? kExitOk : kExitViolations;
  }

  if (lb_cmd->parsed()) {
    std::string err;
    auto cfg = load_config(config_path, err);
    if (!cfg) {
      std::cerr << err << "\n";
      return kExitConfig;
    }
    if (cfg->experiment != "lowerbound") {
      std::cerr << "config: lowerbound expects experiment=lowerbound\n";
      return kExitConfig;
    }
    if (seed_set) cfg->seed = seed_flag;
    CeParams p;
    p.n = cfg->n;
    p.sigma = cfg->sigma;
    p.f = cfg->lb_f;
    const std::string bad = p.validate();
    if (!bad.empty()) {
      std::cerr << "lowerbound: " << bad << "\n";
      return kExitConfig;
    }
    const CeMode mode =
        cfg->lb_mode == "mechanistic" ? CeMode::Mechanistic : CeMode::Bernoulli;
    auto res = simulate_ce(p, cfg->lb_trials, cfg->seed, mode);
    const std::string dir = out_dir(out_flag);
    std::ofstream csv(dir + "/lowerbound.csv", std::ios::app);
    if (csv.tellp() == 0) csv << CeResult::csv_header() << "\n";
    csv << res.csv_row(p, mode) << "\n";
    std::cout << "p=" << p.p() << " no_hit_emp=" << res.p_no_hit_empirical
              << " no_hit_exact=" << res.p_no_hit_exact
              << " tail_emp=" << res.tail_empirical
              << " tail_bound=" << res.tail_bound
              << (res.tail_regime ? "" : " (outside the tail regime)") << "\n";
    return kExitOk;
  }

  return kExitConfig;
}
