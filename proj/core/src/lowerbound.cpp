#include "teamform/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace teamform {

std::string CeParams::validate() const {
  if (n < 4) return "n too small";
  if (sigma < 2 || sigma > n / 2) return "sigma outside [2, n/2]";
  if (f < 0) return "negative message budget";
  const double pr = p();
  if (f > 0 && (pr <= 0.0 || pr >= 1.0)) return "p outside (0,1)";
  if (n - 2 * f < (2 * n) / 3) return "2f exceeds n/3";
  if (2 * f + sigma > (2 * n) / 3) return "2f + sigma exceeds 2n/3";
  return "";
}

double no_hit_probability(const CeParams& params) {
  if (params.f == 0) return 1.0;
  return std::pow(1.0 - params.p(), static_cast<double>(params.rounds()));
}

double CeResult::se_no_hit() const {
  if (trials == 0) return 0;
  const double q = p_no_hit_exact;
  return std::sqrt(std::max(q * (1 - q), 1e-300) /
                   static_cast<double>(trials));
}

std::string CeResult::csv_header() {
  return "n,sigma,f,p,mode,trials,p_no_hit_emp,p_no_hit_exact,tail_emp,"
         "tail_bound,per_round_hit_rate";
}

std::string CeResult::csv_row(const CeParams& p, CeMode mode) const {
  std::ostringstream os;
  os << p.n << ',' << p.sigma << ',' << p.f << ',' << p.p() << ','
     << (mode == CeMode::Bernoulli ? "bernoulli" : "mechanistic") << ','
     << trials << ',' << p_no_hit_empirical << ',' << p_no_hit_exact << ','
     << tail_empirical << ',' << tail_bound << ',' << per_round_hit_rate;
  return os.str();
}

namespace {

std::int64_t run_bernoulli_trial(const CeParams& p, Rng& rng,
                                 std::uint64_t threshold) {
  std::int64_t h = 0;
  for (std::int64_t r = 0; r < p.rounds(); ++r)
    if (rng.next() < threshold) ++h;
  return h;
}

struct MechanisticTrial {
  std::int64_t hits = 0;
  std::int64_t rounds = 0;
};

// Influence components with explicit sizes and token counts. Each round the
// strategy picks a non-trivial component C; the exposed port lands uniformly
// in a conservative pool of n - (rounds so far) unidentified ports. A hit
// merges C with the component owning the port; by convention every round
// additionally absorbs one trivial singleton so N grows by exactly one.
MechanisticTrial run_mechanistic_trial(const CeParams& p, Rng& rng,
                                       CeStrategy strategy) {
  std::vector<CeComponent> comps(p.sigma);
  for (auto& c : comps) c.tokens = 1;
  std::int64_t n_r = p.sigma;  // sum of non-trivial component sizes
  std::int64_t trivial_left = p.n - p.sigma;
  MechanisticTrial out;
  std::size_t rr_next = 0;

  for (std::int64_t r = 1; r <= p.rounds(); ++r) {
    // select a component
    std::size_t sel = 0;
    switch (strategy) {
      case CeStrategy::LargestFirst:
        for (std::size_t i = 1; i < comps.size(); ++i)
          if (comps[i].size > comps[sel].size) sel = i;
        break;
      case CeStrategy::SmallestFirst:
        for (std::size_t i = 1; i < comps.size(); ++i)
          if (comps[i].size < comps[sel].size) sel = i;
        break;
      case CeStrategy::RoundRobin:
        sel = rr_next++ % comps.size();
        break;
    }
    ++comps[sel].exposed_ports;
    ++out.rounds;

    const std::int64_t pool = p.n - (r - 1);
    const std::int64_t others = n_r - comps[sel].size;
    const bool hit = others > 0 &&
                     rng.below(static_cast<std::uint64_t>(pool)) <
                         static_cast<std::uint64_t>(others);
    if (hit) {
      ++out.hits;
      // the port lands uniformly over the other components' nodes
      std::int64_t pick =
          static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(others)));
      std::size_t tgt = comps.size();
      for (std::size_t i = 0; i < comps.size(); ++i) {
        if (i == sel) continue;
        if (pick < comps[i].size) {
          tgt = i;
          break;
        }
        pick -= comps[i].size;
      }
      comps[sel].size += comps[tgt].size;
      comps[sel].tokens += comps[tgt].tokens;
      comps[sel].exposed_ports += comps[tgt].exposed_ports;
      comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(tgt));
      if (tgt < sel) --sel;
    }
    // absorb one trivial singleton (hit or miss), keeping N_{r+1} = N_r + 1
    if (trivial_left > 0) {
      ++comps[sel].size;
      --trivial_left;
    }
    ++n_r;
  }
  return out;
}

}  // namespace

CeResult simulate_ce(const CeParams& params, std::int64_t trials,
                     std::uint64_t seed, CeMode mode, CeStrategy strategy) {
  CeResult res;
  res.trials = trials;
  res.p_no_hit_exact = no_hit_probability(params);
  res.tail_bound = std::exp(-static_cast<double>(params.sigma) / 24.0);
  res.tail_regime = params.tail_regime();

  const double p = params.p();
  const std::uint64_t threshold =
      p >= 1.0 ? UINT64_MAX
               : static_cast<std::uint64_t>(p * 18446744073709551616.0);

  std::int64_t zero = 0, tail = 0, total_hits = 0, total_rounds = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, kStreamTrial, static_cast<std::uint64_t>(t)));
    std::int64_t h;
    if (mode == CeMode::Bernoulli) {
      h = run_bernoulli_trial(params, rng, threshold);
      total_rounds += params.rounds();
    } else {
      auto m = run_mechanistic_trial(params, rng, strategy);
      h = m.hits;
      total_rounds += m.rounds;
    }
    total_hits += h;
    if (h == 0) ++zero;
    if (h >= params.sigma - 1) ++tail;
    if (static_cast<std::size_t>(h) >= res.hit_histogram.size())
      res.hit_histogram.resize(h + 1, 0);
    ++res.hit_histogram[h];
  }
  res.p_no_hit_empirical =
      trials ? static_cast<double>(zero) / static_cast<double>(trials) : 0;
  res.tail_empirical =
      trials ? static_cast<double>(tail) / static_cast<double>(trials) : 0;
  res.per_round_hit_rate =
      total_rounds ? static_cast<double>(total_hits) /
                         static_cast<double>(total_rounds)
                   : 0;
  return res;
}

}  // namespace teamform
