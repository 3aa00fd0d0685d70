// Scaling acceptance: message load per token across system sizes (the
// square-root law shows as a log-log slope near one half) and reaction-time
// growth (at most logarithmic in n, at most linear in the team size).

#include <mutex>

#include "acceptance_util.hpp"

using namespace teamform;
using namespace teamform::accept;

namespace {

struct SweepPoint {
  int n = 0;
  std::int64_t sigma = 0;
  double median_load = 0;
  double median_reaction = 0;
  std::int64_t censored = 0;
  std::int64_t violations = 0;
  std::int64_t aborted = 0;
};

SweepPoint sweep_point(int n, std::int64_t sigma, int seeds,
                       std::uint64_t seed_base, std::int64_t ell,
                       double stagger) {
  SweepPoint pt;
  pt.n = n;
  pt.sigma = sigma;
  std::vector<double> loads(seeds, 0), reactions;
  std::mutex mu;
  parallel_for(seeds, [&](int i) {
    RunConfig cfg;
    cfg.experiment = "tf";
    cfg.n = n;
    cfg.sigma = sigma;
    cfg.seed = seed_base + static_cast<std::uint64_t>(i);
    stagger_injections(cfg, static_cast<int>(ell), stagger);
    auto r = run_experiment(cfg);
    std::lock_guard<std::mutex> lk(mu);
    if (!r.ok) {
      ++pt.aborted;
      return;
    }
    pt.violations += static_cast<std::int64_t>(r.violations.size());
    loads[i] = r.metrics.load;
    for (const auto& s : r.reactions) {
      if (s.censored)
        ++pt.censored;
      else
        reactions.push_back(units_from_ticks(s.duration()));
    }
  });
  pt.median_load = median(loads);
  pt.median_reaction = median(reactions);
  return pt;
}

}  // namespace

int main() {
  Gate gate;
  const int kSeeds = 50;

  // n-sweep at team size two with two injected tokens
  std::vector<SweepPoint> nsweep;
  for (int n : {64, 128, 256, 512, 1024, 2048, 4096}) {
    auto pt = sweep_point(n, 2, kSeeds, 7000 + n, 2, 0.31);
    std::printf("n=%-5d sigma=2  median_load=%-9.1f median_reaction=%-6.2f "
                "censored=%lld violations=%lld\n",
                pt.n, pt.median_load, pt.median_reaction,
                static_cast<long long>(pt.censored),
                static_cast<long long>(pt.violations));
    nsweep.push_back(pt);
  }

  // team-size sweep at n = 256, near-simultaneous saturation
  std::vector<SweepPoint> ssweep;
  for (std::int64_t sigma : {2, 4, 8, 16, 32}) {
    auto pt = sweep_point(256, sigma, kSeeds, 9000 + 10 * sigma, sigma, 0.013);
    std::printf("n=256   sigma=%-2lld median_load=%-9.1f median_reaction=%-6.2f "
                "censored=%lld violations=%lld\n",
                static_cast<long long>(sigma), pt.median_load,
                pt.median_reaction, static_cast<long long>(pt.censored),
                static_cast<long long>(pt.violations));
    ssweep.push_back(pt);
  }

  std::int64_t total_violations = 0, total_aborted = 0;
  for (const auto& pt : nsweep) {
    total_violations += pt.violations;
    total_aborted += pt.aborted;
  }
  for (const auto& pt : ssweep) {
    total_violations += pt.violations;
    total_aborted += pt.aborted;
  }
  gate.check(3, total_violations == 0 && total_aborted == 0,
             "sweep runs stay violation-free (" +
                 std::to_string(total_violations) + " violations, " +
                 std::to_string(total_aborted) + " aborts)");

  // criterion 7: log-log regression of median load against n
  {
    std::vector<double> xs, ys;
    for (const auto& pt : nsweep) {
      xs.push_back(std::log(static_cast<double>(pt.n)));
      ys.push_back(std::log(pt.median_load));
    }
    const auto fit = fit_line(xs, ys);
    const bool ok = fit.slope >= 0.40 && fit.slope <= 0.65;
    gate.check(7, ok,
               "median messages-per-token log-log slope " +
                   std::to_string(fit.slope) + " within [0.40, 0.65]");
  }

  // criterion 8: reaction-time growth
  {
    // at most logarithmic in n at fixed team size
    std::vector<double> xs, ys;
    for (const auto& pt : nsweep) {
      xs.push_back(std::log(static_cast<double>(pt.n)));
      ys.push_back(std::log(pt.median_reaction));
    }
    const auto nfit = fit_line(xs, ys);

    // at most linear in the team size at fixed n
    std::vector<double> sx, sy;
    for (const auto& pt : ssweep) {
      sx.push_back(std::log(static_cast<double>(pt.sigma)));
      sy.push_back(std::log(pt.median_reaction));
    }
    const auto sfit = fit_line(sx, sy);

    // joint additive fit: reaction ~ a*sigma + b*ln n + c over both sweeps,
    // by least squares with the coefficients clamped to be non-negative
    std::vector<std::array<double, 3>> rows;
    std::vector<double> rhs;
    for (const auto& pt : nsweep)
      rows.push_back({static_cast<double>(pt.sigma),
                      std::log(static_cast<double>(pt.n)), 1.0}),
          rhs.push_back(pt.median_reaction);
    for (const auto& pt : ssweep)
      rows.push_back({static_cast<double>(pt.sigma),
                      std::log(static_cast<double>(pt.n)), 1.0}),
          rhs.push_back(pt.median_reaction);
    // 3x3 normal equations
    double ata[3][3] = {}, atb[3] = {};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (int a = 0; a < 3; ++a) {
        atb[a] += rows[i][a] * rhs[i];
        for (int b = 0; b < 3; ++b) ata[a][b] += rows[i][a] * rows[i][b];
      }
    }
    // gaussian elimination
    double m[3][4];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) m[a][b] = ata[a][b];
      m[a][3] = atb[a];
    }
    for (int c = 0; c < 3; ++c) {
      int piv = c;
      for (int rr = c + 1; rr < 3; ++rr)
        if (std::abs(m[rr][c]) > std::abs(m[piv][c])) piv = rr;
      std::swap(m[c], m[piv]);
      for (int rr = 0; rr < 3; ++rr) {
        if (rr == c || m[c][c] == 0) continue;
        const double f = m[rr][c] / m[c][c];
        for (int cc = 0; cc < 4; ++cc) m[rr][cc] -= f * m[c][cc];
      }
    }
    double coef[3] = {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
    std::printf("reaction fit: %.3f*sigma + %.3f*ln(n) + %.3f\n", coef[0],
                coef[1], coef[2]);

    const bool ok = nfit.slope <= 0.35 && sfit.slope <= 1.15 &&
                    coef[0] >= -0.05 && coef[1] >= -0.5;
    gate.check(8, ok,
               "reaction growth: log-log slope vs n " +
                   std::to_string(nfit.slope) +
                   " (<= 0.35), vs team size " + std::to_string(sfit.slope) +
                   " (<= 1.15), additive fit coefficients non-negative");
  }

  // zero censored reaction windows anywhere under uniform delays
  {
    std::int64_t censored = 0;
    for (const auto& pt : nsweep) censored += pt.censored;
    for (const auto& pt : ssweep) censored += pt.censored;
    gate.check(2, censored == 0,
               "no censored reaction windows across " +
                   std::to_string(nsweep.size() + ssweep.size()) +
                   " sweep points (" + std::to_string(censored) + ")");
  }

  return gate.exit_code();
}
