#include "teamform/config.hpp"

#include <cmath>
#include <set>

#include "json.hpp"

namespace teamform {

namespace {

using nlohmann::json;

bool parse_injection(const json& j, InjectionEvent& e, std::string& error) {
  static const std::set<std::string> keys = {"t",    "node", "count",
                                             "term", "color"};
  for (auto& [k, _] : j.items()) {
    if (!keys.count(k)) {
      error = "injection: unknown key '" + k + "'";
      return false;
    }
  }
  e.t = ticks_from_units(j.value("t", 0.0));
  e.node = -1;
  if (j.contains("node")) {
    if (j["node"].is_number())
      e.node = j["node"].get<NodeId>();
    else if (j["node"].get<std::string>() != "any") {
      error = "injection: node must be an id or \"any\"";
      return false;
    }
  }
  e.count = j.value("count", std::int64_t{1});
  e.term = j.value("term", std::int64_t{0});
  if (e.count <= 0) {
    error = "injection: count must be positive";
    return false;
  }
  // palette color for vector runs; plain runs ignore it
  const int color = j.value("color", 0);
  if (color < 0) {
    error = "injection: negative color";
    return false;
  }
  e.instance = static_cast<Instance>(color);
  e.colors = 1;
  return true;
}

}  // namespace

std::optional<RunConfig> parse_run_config(const std::string& text,
                                          std::string& error) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    error = "config is not a JSON object";
    return std::nullopt;
  }
  static const std::set<std::string> keys = {
      "version",      "experiment",  "n",           "sigma",
      "sigma_vec",    "epsilon",     "c",           "c_le",
      "policy",       "policy_script", "injections", "toggles",
      "seed",         "max_sim_time", "term_impl",  "trace_reports",
      "piggyback_once", "checkers",  "fault_injection",
      "lb_f",         "lb_trials",   "lb_mode"};
  for (auto& [k, _] : j.items()) {
    if (!keys.count(k)) {
      error = "config: unknown key '" + k + "'";
      return std::nullopt;
    }
  }
  RunConfig c;
  try {
    c.version = j.value("version", 1);
    if (c.version != 1) {
      error = "config: unsupported version";
      return std::nullopt;
    }
    c.experiment = j.value("experiment", "tf");
    c.n = j.value("n", 16);
    c.sigma = j.value("sigma", std::int64_t{2});
    if (j.contains("sigma_vec"))
      c.sigma_vec = j["sigma_vec"].get<std::vector<std::int64_t>>();
    c.epsilon = j.value("epsilon", 1.0);
    c.c = j.value("c", 3.0);
    c.c_le = j.value("c_le", 14.0);
    if (j.contains("policy")) {
      if (!policy_from_name(j["policy"].get<std::string>(), c.policy)) {
        error = "config: unknown policy";
        return std::nullopt;
      }
    }
    if (j.contains("policy_script")) c.policy_script = j["policy_script"].dump();
    if (j.contains("injections")) {
      for (const auto& ij : j["injections"]) {
        InjectionEvent e;
        if (!parse_injection(ij, e, error)) return std::nullopt;
        c.injections.push_back(e);
      }
    }
    c.toggles = j.value("toggles", false);
    c.seed = j.value("seed", std::uint64_t{1});
    c.max_sim_time = j.value("max_sim_time", -1.0);
    c.term_impl = j.value("term_impl", "term_tokens");
    c.trace_reports = j.value("trace_reports", false);
    c.piggyback_once = j.value("piggyback_once", false);
    c.checkers = j.value("checkers", true);
    if (j.contains("fault_injection")) {
      const auto& f = j["fault_injection"];
      static const std::set<std::string> fkeys = {"drop_channel_ack_at",
                                                  "skip_form_on_inject"};
      for (auto& [k, _] : f.items()) {
        if (!fkeys.count(k)) {
          error = "fault_injection: unknown key '" + k + "'";
          return std::nullopt;
        }
      }
      c.faults.drop_channel_ack_at = f.value("drop_channel_ack_at", -1);
      c.faults.skip_form_on_inject = f.value("skip_form_on_inject", false);
    }
    c.lb_f = j.value("lb_f", std::int64_t{0});
    c.lb_trials = j.value("lb_trials", std::int64_t{100000});
    c.lb_mode = j.value("lb_mode", "bernoulli");
  } catch (const std::exception& e) {
    error = std::string("config: ") + e.what();
    return std::nullopt;
  }
  const std::string sem = validate_run_config(c);
  if (!sem.empty()) {
    error = sem;
    return std::nullopt;
  }
  return c;
}

std::string validate_run_config(const RunConfig& c) {
  static const std::set<std::string> experiments = {
      "tf",  "le_implicit", "le_explicit", "vtf",
      "dtc", "conformance", "lowerbound"};
  if (!experiments.count(c.experiment))
    return "config: unknown experiment '" + c.experiment + "'";
  if (c.n < 2) return "config: n must be at least 2";
  if (c.experiment == "tf" || c.experiment == "dtc" ||
      c.experiment == "conformance") {
    // the single-token case is trivial and excluded by definition
    if (c.sigma < 2) return "config: sigma must be at least 2";
    if (c.sigma > c.n) return "config: sigma must not exceed n";
  }
  if (c.experiment == "vtf") {
    if (c.sigma_vec.empty()) return "config: vtf requires sigma_vec";
    for (auto s : c.sigma_vec)
      if (s < 1) return "config: sigma_vec entries must be positive";
  }
  if (c.experiment == "le_implicit" || c.experiment == "le_explicit") {
    if (c.epsilon <= 0.0 || c.epsilon >= 0.5)
      return "config: leader election needs epsilon in (0, 1/2)";
    if (c.term_impl != "term_tokens" && c.term_impl != "accumulation")
      return "config: unknown term_impl";
  } else if (c.epsilon <= 0.0 || c.epsilon > 1.0) {
    return "config: epsilon must lie in (0,1]";
  }
  if (c.c <= 0) return "config: overlay constant c must be positive";
  if (c.experiment == "lowerbound") {
    if (c.lb_trials < 1) return "config: lb_trials must be positive";
    if (c.lb_mode != "bernoulli" && c.lb_mode != "mechanistic")
      return "config: lb_mode must be bernoulli or mechanistic";
  }
  if (c.policy == PolicyKind::Scripted && c.policy_script.empty())
    return "config: scripted policy requires policy_script";
  return "";
}

std::string config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["version"] = c.version;
  j["experiment"] = c.experiment;
  j["n"] = c.n;
  j["sigma"] = c.sigma;
  if (!c.sigma_vec.empty()) j["sigma_vec"] = c.sigma_vec;
  j["epsilon"] = c.epsilon;
  j["c"] = c.c;
  if (c.experiment == "le_implicit" || c.experiment == "le_explicit") {
    j["c_le"] = c.c_le;
    j["term_impl"] = c.term_impl;
  }
  j["policy"] = policy_name(c.policy);
  if (!c.policy_script.empty())
    j["policy_script"] = nlohmann::json::parse(c.policy_script);
  if (!c.injections.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : c.injections) {
      nlohmann::ordered_json ij;
      ij["t"] = units_from_ticks(e.t);
      if (e.node >= 0)
        ij["node"] = e.node;
      else
        ij["node"] = "any";
      ij["count"] = e.count;
      if (e.term) ij["term"] = e.term;
      if (e.instance) ij["color"] = e.instance;
      arr.push_back(ij);
    }
    j["injections"] = arr;
  }
  j["toggles"] = c.toggles;
  j["seed"] = c.seed;
  j["max_sim_time"] = c.max_sim_time;
  j["trace_reports"] = c.trace_reports;
  j["piggyback_once"] = c.piggyback_once;
  j["checkers"] = c.checkers;
  if (!c.faults.none()) {
    nlohmann::ordered_json f;
    if (c.faults.drop_channel_ack_at >= 0)
      f["drop_channel_ack_at"] = c.faults.drop_channel_ack_at;
    if (c.faults.skip_form_on_inject) f["skip_form_on_inject"] = true;
    j["fault_injection"] = f;
  }
  if (c.experiment == "lowerbound") {
    j["lb_f"] = c.lb_f;
    j["lb_trials"] = c.lb_trials;
    j["lb_mode"] = c.lb_mode;
  }
  return j.dump();
}

}  // namespace teamform
