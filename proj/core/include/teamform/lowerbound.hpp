#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teamform/rng.hpp"

namespace teamform {

// Monte-Carlo model of the central-entity influence-component process used
// for the message lower bound: sigma singleton token components, 2f rounds,
// each round exposing one port of a selected non-trivial component. A round
// "hits" when the exposed port lands in another non-trivial component.
struct CeParams {
  int n = 0;
  std::int64_t sigma = 2;  // within [2, n/2]
  std::int64_t f = 0;      // message budget; 2f rounds

  double p() const {
    return (3.0 * static_cast<double>(f) + 1.5 * static_cast<double>(sigma)) /
           static_cast<double>(n);
  }
  std::int64_t rounds() const { return 2 * f; }
  double mu() const { return static_cast<double>(rounds()) * p(); }

  // Concrete "sufficiently large n" guards: the残 pool stays above 2n/3 and
  // components never exhaust the trivial reservoir.
  std::string validate() const;
  bool tail_regime() const { return mu() <= static_cast<double>(sigma) / 8.0; }
};

enum class CeMode { Bernoulli, Mechanistic };

// Component-selection strategies for the mechanistic mode (the bounds hold
// for any of them; largest-first is the default).
enum class CeStrategy { LargestFirst, SmallestFirst, RoundRobin };

struct CeComponent {
  std::int64_t size = 1;
  std::int64_t tokens = 0;
  std::int64_t exposed_ports = 0;
};

struct CeResult {
  std::int64_t trials = 0;
  std::vector<std::int64_t> hit_histogram;  // index = H
  double p_no_hit_empirical = 0;
  double p_no_hit_exact = 0;
  double per_round_hit_rate = 0;  // mechanistic diagnostics
  double tail_empirical = 0;      // P[H >= sigma-1]
  double tail_bound = 0;          // exp(-sigma/24)
  bool tail_regime = false;

  double se_no_hit() const;
  std::string csv_row(const CeParams& p, CeMode mode) const;
  static std::string csv_header();
};

double no_hit_probability(const CeParams& params);

CeResult simulate_ce(const CeParams& params, std::int64_t trials,
                     std::uint64_t seed, CeMode mode,
                     CeStrategy strategy = CeStrategy::LargestFirst);

}  // namespace teamform
