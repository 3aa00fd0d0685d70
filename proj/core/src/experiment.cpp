#include "teamform/experiment.hpp"

#include <algorithm>
#include <cmath>

namespace teamform {

namespace {

Tick default_horizon(const RunConfig& cfg, std::int64_t sigma) {
  if (cfg.max_sim_time >= 0) return ticks_from_units(cfg.max_sim_time);
  const double units =
      100.0 * (static_cast<double>(sigma) +
               std::log(static_cast<double>(std::max(cfg.n, 2))));
  return ticks_from_units(units);
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return -1;
  std::sort(xs.begin(), xs.end());
  const double pos = q * (static_cast<double>(xs.size()) - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1 - frac) + xs[hi] * frac;
}

}  // namespace

std::vector<TfParams> instances_for_config(const RunConfig& cfg,
                                           std::int64_t& sigma_out) {
  std::vector<TfParams> instances;
  sigma_out = cfg.sigma;
  if (cfg.experiment == "le_implicit" || cfg.experiment == "le_explicit") {
    LeConfig lc;
    lc.n = cfg.n;
    lc.epsilon = cfg.epsilon;
    lc.c_le = cfg.c_le;
    sigma_out = le_sigma(lc);
    TfParams p;
    p.sigma = sigma_out;
    instances.push_back(p);
  } else if (cfg.experiment == "vtf") {
    VtfConfig vc;
    vc.sigma_vec = cfg.sigma_vec;
    VtfApp app(vc);
    instances = app.instance_params();
    sigma_out = *std::max_element(cfg.sigma_vec.begin(), cfg.sigma_vec.end());
  } else {
    TfParams p;
    p.sigma = cfg.sigma;
    instances.push_back(p);
  }
  return instances;
}

RunResult run_experiment(const RunConfig& cfg) {
  RunResult res;
  res.n = cfg.n;
  const std::string sem = validate_run_config(cfg);
  if (!sem.empty()) {
    res.error = sem;
    return res;
  }

  // policy
  std::unique_ptr<Adversary> policy;
  if (cfg.policy == PolicyKind::Scripted) {
    std::string err;
    auto sp = ScriptedPolicy::from_json(cfg.policy_script, err);
    if (!sp) {
      res.error = err;
      return res;
    }
    policy = std::move(sp);
  } else {
    policy = make_policy(cfg.policy);
  }
  policy->set_toggling(cfg.toggles);
  if (!cfg.injections.empty()) {
    auto plan = policy->injection_plan();
    plan.insert(plan.end(), cfg.injections.begin(), cfg.injections.end());
    policy->set_injection_plan(plan);
  }

  // overlay and instances
  res.graph = std::make_shared<PuGraph>(PuGraph::build(cfg.n, cfg.c, cfg.seed));
  std::unique_ptr<LeApp> le_app;
  std::unique_ptr<VtfApp> vtf_app;
  std::unique_ptr<DtcApp> dtc_app;
  TfApp* app = nullptr;
  std::vector<TfParams> instances;
  std::int64_t sigma = cfg.sigma;

  if (cfg.experiment == "le_implicit" || cfg.experiment == "le_explicit") {
    LeConfig lc;
    lc.n = cfg.n;
    lc.epsilon = cfg.epsilon;
    lc.c_le = cfg.c_le;
    lc.term_tokens = cfg.term_impl == "term_tokens";
    lc.explicit_mode = cfg.experiment == "le_explicit";
    le_app = std::make_unique<LeApp>(lc);
    app = le_app.get();
    sigma = le_app->sigma();
    TfParams p;
    p.sigma = sigma;
    instances.push_back(p);
  } else if (cfg.experiment == "vtf") {
    VtfConfig vc;
    vc.sigma_vec = cfg.sigma_vec;
    vtf_app = std::make_unique<VtfApp>(vc);
    app = vtf_app.get();
    instances = vtf_app->instance_params();
    sigma = *std::max_element(cfg.sigma_vec.begin(), cfg.sigma_vec.end());
  } else {
    if (cfg.experiment == "dtc") {
      dtc_app = std::make_unique<DtcApp>();
      app = dtc_app.get();
    }
    TfParams p;
    p.sigma = sigma;
    instances.push_back(p);
  }
  res.instances = instances;
  res.sigma_effective = sigma;
  res.trace_reports = cfg.trace_reports;

  TfDriver driver(res.graph.get(), instances, app, cfg.trace_reports);
  driver.set_faults(cfg.faults);

  SimOptions so;
  so.n = cfg.n;
  so.seed = cfg.seed;
  // Leader election guarantees at least (1/2 + epsilon) n nodes stay
  // non-faulty; everything else uses epsilon n directly.
  so.epsilon = le_app ? 0.5 + cfg.epsilon : cfg.epsilon;
  so.max_time = default_horizon(cfg, sigma);
  so.config_json = config_to_json(cfg);

  Simulation sim(so, std::move(policy));
  sim.set_protocol(&driver);
  res.fragile = sim.fragile_set();
  sim.schedule_injection_plan();
  if (cfg.experiment == "le_implicit" || cfg.experiment == "le_explicit") {
    for (NodeId v = 0; v < cfg.n; ++v) sim.schedule_start(v, 0);
  }

  sim.run();
  res.ok = !sim.aborted();
  if (sim.aborted()) res.error = sim.abort_reason();
  res.settled = sim.settled();
  res.censored = sim.censored();
  res.ledger = sim.ledger();
  res.log = std::make_shared<ExecutionLog>(std::move(sim.log()));

  for (const auto& r : res.log->records)
    if (r.kind == RecordKind::TeamForm) res.teams += r.a;

  // metrics
  auto ctx = res.check_context();
  res.reactions = reaction_samples(*res.log, ctx, sigma, 0);
  auto mc = message_counts(*res.log, cfg.piggyback_once);
  res.metrics.seed = cfg.seed;
  res.metrics.n = cfg.n;
  res.metrics.sigma = sigma;
  res.metrics.policy = policy_name(cfg.policy);
  res.metrics.messages_total = mc.total;
  res.metrics.messages_channel = mc.channel_control;
  res.metrics.messages_relayed = mc.relayed;
  res.metrics.tokens_injected = res.ledger.injected;
  res.metrics.tokens_fake = res.ledger.injected_fake;
  res.metrics.teams = res.teams;
  res.metrics.load = res.ledger.injected > 0
                         ? static_cast<double>(mc.total) /
                               static_cast<double>(res.ledger.injected)
                         : -1;
  std::vector<double> durations;
  for (const auto& s : res.reactions) {
    if (s.censored)
      ++res.metrics.reaction_censored;
    else
      durations.push_back(units_from_ticks(s.duration()));
  }
  res.metrics.reaction_p50 = percentile(durations, 0.5);
  res.metrics.reaction_p95 = percentile(durations, 0.95);

  if (cfg.checkers && res.ok) {
    ctx.expect_limbo_free = cfg.faults.none();
    res.violations = run_all_checkers(*res.log, ctx);
  }
  res.metrics.violations = static_cast<std::int64_t>(res.violations.size());

  if (le_app) res.le = le_app->finish(sim, driver);
  if (vtf_app) res.vtf = vtf_app->outcome();
  if (dtc_app) res.alarms = dtc_app->alarms();
  return res;
}

ReplayVerdict replay_log(const ExecutionLog& original) {
  ReplayVerdict v;
  std::string err;
  auto cfg = parse_run_config(original.config_json, err);
  if (!cfg) {
    v.error = "embedded config invalid: " + err;
    return v;
  }
  cfg->seed = original.seed;
  RunResult fresh = run_experiment(*cfg);
  if (!fresh.ok && fresh.log == nullptr) {
    v.error = fresh.error;
    return v;
  }
  v.violations = static_cast<std::int64_t>(fresh.violations.size());
  const auto& a = original.records;
  const auto& b = fresh.log->records;
  const std::size_t m = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < m; ++i) {
    if (!(a[i] == b[i])) {
      v.first_divergence = static_cast<std::int64_t>(i);
      return v;
    }
  }
  if (a.size() != b.size()) {
    v.first_divergence = static_cast<std::int64_t>(m);
    return v;
  }
  v.identical = fresh.log->to_jsonl() ==
                ExecutionLog{original.config_json, original.seed, a}.to_jsonl();
  if (!v.identical) v.first_divergence = 0;
  return v;
}

}  // namespace teamform
