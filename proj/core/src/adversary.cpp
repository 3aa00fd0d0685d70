#include "teamform/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace teamform {

const char* policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::UniformRandom: return "uniform_random";
    case PolicyKind::ConstantMaxDelay: return "constant_max_delay";
    case PolicyKind::Scripted: return "scripted";
    case PolicyKind::AntiGatherHeuristic: return "anti_gather_heuristic";
  }
  return "?";
}

bool policy_from_name(const std::string& s, PolicyKind& out) {
  for (int i = 0; i <= static_cast<int>(PolicyKind::AntiGatherHeuristic); ++i) {
    auto k = static_cast<PolicyKind>(i);
    if (s == policy_name(k)) {
      out = k;
      return true;
    }
  }
  return false;
}

std::vector<NodeId> Adversary::choose_fragile(int n, double epsilon, Rng& rng) {
  if (epsilon <= 0.0 || epsilon > 1.0)
    throw std::invalid_argument("epsilon must lie in (0,1]");
  const int survivors = static_cast<int>(std::ceil(epsilon * n));
  const int fcount = n - survivors;
  // Fisher-Yates prefix of a permutation.
  std::vector<NodeId> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  for (int i = 0; i < fcount; ++i) {
    int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(fcount);
  std::sort(ids.begin(), ids.end());
  return ids;
}

NodeId Adversary::resolve_any(Tick, const std::vector<bool>& faulty,
                              Rng& rng) {
  std::vector<NodeId> alive;
  alive.reserve(faulty.size());
  for (NodeId i = 0; i < static_cast<NodeId>(faulty.size()); ++i)
    if (!faulty[i]) alive.push_back(i);
  if (alive.empty()) return -1;
  return alive[rng.below(alive.size())];
}

ToggleDecision Adversary::toggles(Tick lo, Tick hi,
                                  const std::vector<bool>& fragile,
                                  const std::vector<bool>& faulty, Rng& rng) {
  ToggleDecision d;
  if (!toggling_) return d;
  const Tick gap = hi - lo;
  if (gap < 2 * kTicksPerUnit) return d;
  d.at = gap > 2 * kTicksPerUnit ? lo + 2 * kTicksPerUnit : lo + gap / 2;
  for (NodeId i = 0; i < static_cast<NodeId>(fragile.size()); ++i) {
    if (!fragile[i]) continue;
    if (rng.coin()) d.nodes.push_back(i);
  }
  (void)faulty;
  return d;
}

namespace {
Tick uniform_delay(Rng& rng) {
  const Tick lo = kTicksPerUnit / 10;  // delays drawn from (0.1, 1.0]
  return rng.range(lo + 1, kTicksPerUnit);
}
}  // namespace

Tick UniformRandomPolicy::delay(const DelayQuery&, Rng& rng) {
  return uniform_delay(rng);
}

Tick ConstantMaxDelayPolicy::delay(const DelayQuery&, Rng&) {
  return kTicksPerUnit;
}

Tick AntiGatherPolicy::delay(const DelayQuery& q, Rng& rng) {
  if (q.src_busy && q.dst_busy) return kTicksPerUnit;
  return uniform_delay(rng);
}

NodeId AntiGatherPolicy::resolve_any(Tick, const std::vector<bool>& faulty,
                                     Rng&) {
  const auto n = static_cast<NodeId>(faulty.size());
  for (NodeId probe = 0; probe < n; ++probe) {
    NodeId cand = static_cast<NodeId>((next_target_ + probe) % n);
    if (!faulty[cand]) {
      next_target_ = static_cast<NodeId>((cand + 1) % n);
      return cand;
    }
  }
  return -1;
}

ScriptedPolicy::ScriptedPolicy(Script script) : script_(std::move(script)) {
  plan_ = script_.injections;
  toggling_ = !script_.toggles.empty();
}

std::vector<NodeId> ScriptedPolicy::choose_fragile(int n, double epsilon,
                                                   Rng&) {
  const int survivors = static_cast<int>(std::ceil(epsilon * n));
  if (static_cast<int>(script_.fragile.size()) > n - survivors)
    throw std::invalid_argument("scripted fragile set exceeds the 1-eps bound");
  return script_.fragile;
}

Tick ScriptedPolicy::delay(const DelayQuery&, Rng&) {
  if (next_delay_ >= script_.delays.size())
    throw std::runtime_error("scripted policy ran out of delay decisions");
  return script_.delays[next_delay_++];
}

ToggleDecision ScriptedPolicy::toggles(Tick lo, Tick hi,
                                       const std::vector<bool>&,
                                       const std::vector<bool>&, Rng&) {
  ToggleDecision d;
  const int gap = gap_counter_++;
  for (const auto& t : script_.toggles) {
    if (t.gap_index == gap) d.nodes.push_back(t.node);
  }
  if (!d.nodes.empty()) d.at = lo + std::max<Tick>(1, (hi - lo) / 2);
  return d;
}

std::unique_ptr<ScriptedPolicy> ScriptedPolicy::from_json(
    const std::string& text, std::string& error) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    error = "scripted policy: not a JSON object";
    return nullptr;
  }
  ScriptedPolicy::Script s;
  for (auto& [key, val] : j.items()) {
    if (key == "delays") {
      for (const auto& d : val)
        s.delays.push_back(ticks_from_units(d.get<double>()));
    } else if (key == "delays_ticks") {
      for (const auto& d : val) s.delays.push_back(d.get<Tick>());
    } else if (key == "injections") {
      for (const auto& inj : val) {
        InjectionEvent e;
        e.t = ticks_from_units(inj.value("t", 0.0));
        if (inj.contains("node") && inj["node"].is_number())
          e.node = inj["node"].get<NodeId>();
        e.count = inj.value("count", std::int64_t{1});
        e.term = inj.value("term", std::int64_t{0});
        e.instance = inj.value("instance", Instance{0});
        e.colors = inj.value("color", 0) == 1 ? 2 : 1;
        s.injections.push_back(e);
      }
    } else if (key == "toggles") {
      for (const auto& t : val) {
        ScriptedPolicy::Script::ToggleEntry e;
        e.gap_index = t.value("gap_index", 0);
        e.node = t.value("node", NodeId{0});
        s.toggles.push_back(e);
      }
    } else if (key == "fragile") {
      for (const auto& f : val) s.fragile.push_back(f.get<NodeId>());
    } else {
      error = "scripted policy: unknown key '" + key + "'";
      return nullptr;
    }
  }
  for (Tick d : s.delays) {
    if (d <= 0 || d > kTicksPerUnit) {
      error = "scripted policy: delay out of (0,1]";
      return nullptr;
    }
  }
  return std::make_unique<ScriptedPolicy>(std::move(s));
}

std::unique_ptr<Adversary> make_policy(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::UniformRandom:
      return std::make_unique<UniformRandomPolicy>();
    case PolicyKind::ConstantMaxDelay:
      return std::make_unique<ConstantMaxDelayPolicy>();
    case PolicyKind::AntiGatherHeuristic:
      return std::make_unique<AntiGatherPolicy>();
    case PolicyKind::Scripted:
      throw std::invalid_argument("scripted policies require a script");
  }
  return nullptr;
}

}  // namespace teamform
