#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "teamform/experiment.hpp"

namespace teamform::accept {

struct Gate {
  int failures = 0;

  void check(int criterion, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  int exit_code() const { return failures == 0 ? 0 : 1; }
};

// Runs fn(i) for i in [0, count) over a worker pool; runs are isolated.
inline void parallel_for(int count, const std::function<void(int)>& fn,
                         int threads = 0) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 4;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(threads, count); ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  for (auto& t : pool) t.join();
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

struct LineFit {
  double slope = 0, intercept = 0;
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

// One-sided lower-confidence test: is the empirical frequency k/m consistent
// with a true success probability of at least p0, at confidence z sigmas?
inline bool frequency_at_least(std::int64_t k, std::int64_t m, double p0,
                               double z = 2.326) {
  if (m == 0) return false;
  const double freq = static_cast<double>(k) / static_cast<double>(m);
  const double slack = z * std::sqrt(p0 * (1 - p0) / static_cast<double>(m));
  return freq >= p0 - slack;
}

// Staggered "any node" single-token injections.
inline void stagger_injections(RunConfig& cfg, int count, double step,
                               Instance inst = 0) {
  for (int i = 0; i < count; ++i) {
    InjectionEvent e;
    e.t = ticks_from_units(step * i);
    e.node = -1;
    e.count = 1;
    e.instance = inst;
    cfg.injections.push_back(e);
  }
}

}  // namespace teamform::accept
