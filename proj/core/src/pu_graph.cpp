#include "teamform/pu_graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace teamform {

PuGraph PuGraph::build(int n, double c, std::uint64_t master_seed) {
  if (n < 2) throw std::invalid_argument("overlay needs n >= 2");
  if (c <= 0) throw std::invalid_argument("overlay constant must be positive");
  PuGraph g;
  g.n_ = n;
  g.c_ = c;
  g.prob_ = std::min(1.0, c * std::sqrt(std::log(static_cast<double>(n)) /
                                        static_cast<double>(n)));
  g.u_of_p_.resize(n);
  g.p_of_u_.resize(n);

  const bool always = g.prob_ >= 1.0;
  // Threshold on the raw 64-bit draw; exact for prob 1 and deterministic for
  // a fixed build of the library.
  const std::uint64_t threshold =
      always ? UINT64_MAX
             : static_cast<std::uint64_t>(
                   g.prob_ * 18446744073709551616.0 /* 2^64 */);
  for (NodeId p = 0; p < n; ++p) {
    Rng factory(derive_seed(master_seed, kStreamFactory, p));
    auto& adj = g.u_of_p_[p];
    for (NodeId u = 0; u < n; ++u) {
      const std::uint64_t draw = factory.next();
      if (always || draw < threshold) {
        adj.push_back(u);
        g.p_of_u_[u].push_back(p);
        ++g.edges_;
      }
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    g.max_degree_ =
        std::max({g.max_degree_, static_cast<int>(g.u_of_p_[v].size()),
                  static_cast<int>(g.p_of_u_[v].size())});
  }
  return g;
}

bool PuGraph::has_edge(NodeId p, NodeId u) const {
  const auto& adj = u_of_p_[p];
  return std::binary_search(adj.begin(), adj.end(), u);
}

PuReport verify_properties(const PuGraph& g,
                           const std::vector<NodeId>& fragile) {
  const int n = g.n();
  PuReport rep;
  rep.max_degree = g.max_degree();
  rep.degree_bound_constant =
      rep.max_degree /
      std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n)));

  std::vector<bool> is_fragile(n, false);
  for (NodeId f : fragile) is_fragile[f] = true;

  // covered[p*n+q] <- some non-fragile utility sees both p and q.
  std::vector<std::uint64_t> covered((static_cast<std::size_t>(n) * n + 63) / 64,
                                     0);
  auto mark = [&](NodeId p, NodeId q) {
    std::size_t bit = static_cast<std::size_t>(p) * n + q;
    covered[bit >> 6] |= std::uint64_t{1} << (bit & 63);
  };
  auto marked = [&](NodeId p, NodeId q) {
    std::size_t bit = static_cast<std::size_t>(p) * n + q;
    return (covered[bit >> 6] >> (bit & 63)) & 1;
  };

  for (NodeId u = 0; u < n; ++u) {
    if (is_fragile[u]) continue;
    const auto& ps = g.primaries_of(u);
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j) mark(ps[i], ps[j]);
  }
  rep.uncovered_pairs = 0;
  for (NodeId p = 0; p < n; ++p)
    for (NodeId q = p + 1; q < n; ++q)
      if (!marked(p, q)) ++rep.uncovered_pairs;
  rep.property1_holds = rep.uncovered_pairs == 0;
  return rep;
}

void dump_adjacency(const PuGraph& g, std::ostream& os) {
  for (NodeId p = 0; p < g.n(); ++p) {
    os << "{\"p\":" << p << ",\"u\":[";
    const auto& us = g.utilities_of(p);
    for (std::size_t i = 0; i < us.size(); ++i) {
      if (i) os << ',';
      os << us[i];
    }
    os << "]}\n";
  }
}

}  // namespace teamform
