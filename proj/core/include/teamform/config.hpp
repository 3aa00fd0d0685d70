#pragma once

#include <optional>
#include <string>
#include <vector>

#include "teamform/adversary.hpp"

namespace teamform {

// Testing-only protocol mutations for exercising the violation checkers.
struct FaultInjection {
  NodeId drop_channel_ack_at = -1;  // this primary never acknowledges Channel
  bool skip_form_on_inject = false; // idle nodes hoard past the team size
  bool none() const {
    return drop_channel_ack_at < 0 && !skip_form_on_inject;
  }
};

struct RunConfig {
  int version = 1;
  std::string experiment = "tf";  // tf | le_implicit | le_explicit | vtf |
                                  // dtc | conformance | lowerbound
  int n = 16;
  std::int64_t sigma = 2;
  std::vector<std::int64_t> sigma_vec;  // vtf palette
  double epsilon = 1.0;
  double c = 3.0;
  double c_le = 14.0;
  PolicyKind policy = PolicyKind::UniformRandom;
  std::string policy_script;  // inline JSON for scripted policies
  std::vector<InjectionEvent> injections;
  bool toggles = false;
  std::uint64_t seed = 1;
  double max_sim_time = -1;  // < 0: derived as 100 * (sigma + ln n)
  std::string term_impl = "term_tokens";  // or "accumulation"
  bool trace_reports = false;
  bool piggyback_once = false;
  bool checkers = true;
  FaultInjection faults;

  // lowerbound experiment knobs
  std::int64_t lb_f = 0;
  std::int64_t lb_trials = 100000;
  std::string lb_mode = "bernoulli";
};

// Strict parse: schema-validated, unknown keys rejected at every level.
std::optional<RunConfig> parse_run_config(const std::string& json_text,
                                          std::string& error);

// Canonical snapshot embedded in logs; parse(config_to_json(c)) == c.
std::string config_to_json(const RunConfig& c);

// Post-parse semantic validation (sigma range, palette, epsilon...).
std::string validate_run_config(const RunConfig& c);

}  // namespace teamform
