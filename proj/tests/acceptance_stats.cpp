// Statistical acceptance: empirical retirement frequency of operational
// channels within three endpoint phase-ends, and the top-two-potential
// growth rate over stagnant windows. Both are one-sided tests against loose
// analytical constants.

#include <algorithm>
#include <map>
#include <mutex>

#include "acceptance_util.hpp"

using namespace teamform;
using namespace teamform::accept;

namespace {

constexpr Tick kUnit = kTicksPerUnit;

// Next-phase-end operator per node, iterated from operational intervals and
// phase-end times reconstructed off the log.
struct PhaseOracle {
  std::map<NodeId, std::vector<Tick>> phase_ends;
  std::map<NodeId, std::vector<std::pair<Tick, Tick>>> op_intervals;

  explicit PhaseOracle(const ExecutionLog& log) {
    std::map<NodeId, int> med_count;
    std::map<NodeId, Tick> op_since;
    for (const auto& r : log.records) {
      if (r.instance != 0) continue;
      switch (r.kind) {
        case RecordKind::PhaseEnd:
          phase_ends[r.node].push_back(r.t);
          break;
        case RecordKind::MedsAdd:
          if (med_count[r.node]++ == 0) op_since[r.node] = r.t;
          break;
        case RecordKind::MedsRemove:
          if (--med_count[r.node] == 0)
            op_intervals[r.node].push_back({op_since[r.node], r.t});
          break;
        default:
          break;
      }
    }
    for (auto& [p, c] : med_count)
      if (c > 0) op_intervals[p].push_back({op_since[p], INT64_MAX});
  }

  bool operational_after(NodeId p, Tick t) const {
    auto it = op_intervals.find(p);
    if (it == op_intervals.end()) return false;
    for (const auto& [lo, hi] : it->second)
      if (lo <= t && t < hi) return true;
    return false;
  }

  Tick next_phase_end(NodeId p, Tick t) const {
    if (!operational_after(p, t)) return t;
    auto it = phase_ends.find(p);
    if (it == phase_ends.end()) return t;
    auto up = std::upper_bound(it->second.begin(), it->second.end(), t);
    return up == it->second.end() ? t : *up;
  }

  Tick phi3(NodeId p, Tick t) const {
    for (int i = 0; i < 3; ++i) t = next_phase_end(p, t);
    return t;
  }
};

struct EpochSpan {
  NodeId p1 = -1, p2 = -1;
  Tick add[2] = {-1, -1};
  Tick rem[2] = {-1, -1};
};

std::map<std::uint64_t, EpochSpan> epoch_spans(const ExecutionLog& log) {
  std::map<std::uint64_t, EpochSpan> spans;
  for (const auto& r : log.records) {
    if (r.instance != 0) continue;
    if (r.kind == RecordKind::ChanCreate) {
      auto& e = spans[static_cast<std::uint64_t>(r.c)];
      e.p1 = static_cast<NodeId>(r.a);
      e.p2 = static_cast<NodeId>(r.b);
    } else if (r.kind == RecordKind::MedsAdd ||
               r.kind == RecordKind::MedsRemove) {
      auto it = spans.find(static_cast<std::uint64_t>(r.c));
      if (it == spans.end()) continue;
      const int side = r.node == it->second.p1 ? 0 : 1;
      if (r.kind == RecordKind::MedsAdd) {
        if (it->second.add[side] < 0) it->second.add[side] = r.t;
      } else if (it->second.rem[side] < 0) {
        it->second.rem[side] = r.t;
      }
    }
  }
  return spans;
}

}  // namespace

int main() {
  Gate gate;

  // --- retirement within three phase-ends of either endpoint ---------------
  {
    std::mutex mu;
    std::int64_t samples = 0, successes = 0;
    const int runs = 420;
    parallel_for(runs, [&](int i) {
      RunConfig cfg;
      cfg.experiment = "tf";
      cfg.n = 32;
      cfg.sigma = 8;
      cfg.seed = 40000 + static_cast<std::uint64_t>(i);
      stagger_injections(cfg, 25, 0.43);
      auto r = run_experiment(cfg);
      if (!r.ok) return;
      PhaseOracle oracle(*r.log);
      auto spans = epoch_spans(*r.log);
      std::int64_t s = 0, ok = 0;
      for (const auto& [epoch, e] : spans) {
        if (e.add[0] < 0 || e.add[1] < 0) continue;  // never operational
        const Tick t0 = std::max(e.add[0], e.add[1]);
        Tick retire = -1;
        if (e.rem[0] >= 0 && (e.rem[1] < 0 || e.rem[0] <= e.rem[1]))
          retire = e.rem[0];
        else if (e.rem[1] >= 0)
          retire = e.rem[1];
        if (retire < 0) continue;  // censored by run end
        const Tick budget =
            std::min(oracle.phi3(e.p1, t0), oracle.phi3(e.p2, t0));
        ++s;
        if (retire <= budget) ++ok;
      }
      std::lock_guard<std::mutex> lk(mu);
      samples += s;
      successes += ok;
    });
    const double freq =
        samples ? static_cast<double>(successes) / samples : 0.0;
    const bool ok = samples >= 5000 &&
                    frequency_at_least(successes, samples, 1.0 / 16.0);
    gate.check(
        9, ok,
        "retirement within three endpoint phase-ends: " +
            std::to_string(successes) + "/" + std::to_string(samples) +
            " = " + std::to_string(freq) + " >= 1/16 at 99% one-sided");
  }

  // --- top-two-potential growth over stagnant 53-unit windows --------------
  {
    std::mutex mu;
    std::int64_t windows = 0, grew = 0;
    const int runs = 160;
    parallel_for(runs, [&](int i) {
      RunConfig cfg;
      cfg.experiment = "tf";
      cfg.n = 32;
      cfg.sigma = 16;
      cfg.policy = i % 2 ? PolicyKind::ConstantMaxDelay
                         : PolicyKind::AntiGatherHeuristic;
      cfg.seed = 60000 + static_cast<std::uint64_t>(i);
      stagger_injections(cfg, 17, 0.01);
      auto r = run_experiment(cfg);
      if (!r.ok) return;
      auto pts = potential_series(*r.log, r.check_context());
      std::int64_t w = 0, g = 0;
      std::size_t k = 0;
      while (k < pts.size()) {
        if (pts[k].tokens_in_system < cfg.sigma) {
          ++k;
          continue;
        }
        const Tick start = pts[k].t;
        const Tick end = start + 53 * kUnit;
        // find the last point inside the window; bail out on formations
        std::size_t j = k;
        bool formed = false;
        while (j + 1 < pts.size() && pts[j + 1].t <= end) {
          ++j;
          if (pts[j].team_formed_here) {
            formed = true;
            break;
          }
        }
        if (formed) {
          k = j + 1;
          continue;
        }
        if (j + 1 >= pts.size()) break;  // window not fully observed
        ++w;
        if (pts[j].psi_hat > pts[k].psi_hat) ++g;
        k = j + 1;
      }
      std::lock_guard<std::mutex> lk(mu);
      windows += w;
      grew += g;
    });
    const double freq = windows ? static_cast<double>(grew) / windows : 0.0;
    const bool ok =
        windows >= 30 && frequency_at_least(grew, windows, 1.0 / 256.0);
    gate.check(10, ok,
               "top-two potential grew in " + std::to_string(grew) + "/" +
                   std::to_string(windows) + " = " + std::to_string(freq) +
                   " stagnant 53-unit windows (>= 1/256 one-sided)");
  }

  return gate.exit_code();
}
