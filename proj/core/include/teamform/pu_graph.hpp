#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "teamform/messages.hpp"
#include "teamform/rng.hpp"

namespace teamform {

// Random bipartite primary-utility overlay. Each pair (p,u) is an edge
// independently with probability min(1, c * sqrt(ln n / n)); the coin tosses
// come from the per-primary factory streams, so the adjacency is part of each
// primary's initial state and never changes during a run.
class PuGraph {
 public:
  static PuGraph build(int n, double c, std::uint64_t master_seed);

  int n() const { return n_; }
  double c() const { return c_; }
  double edge_probability() const { return prob_; }

  const std::vector<NodeId>& utilities_of(NodeId p) const { return u_of_p_[p]; }
  const std::vector<NodeId>& primaries_of(NodeId u) const { return p_of_u_[u]; }
  bool has_edge(NodeId p, NodeId u) const;

  std::int64_t edge_count() const { return edges_; }
  int max_degree() const { return max_degree_; }

 private:
  int n_ = 0;
  double c_ = 0;
  double prob_ = 0;
  std::int64_t edges_ = 0;
  int max_degree_ = 0;
  std::vector<std::vector<NodeId>> u_of_p_;
  std::vector<std::vector<NodeId>> p_of_u_;
};

struct PuReport {
  bool property1_holds = false;  // every primary pair shares a live utility
  int max_degree = 0;
  double degree_bound_constant = 0;  // max_degree / sqrt(n ln n)
  std::int64_t uncovered_pairs = 0;
};

// Exhaustive check of the overlay properties against a fragile set: (1) every
// unordered primary pair has a common utility outside F, (2) degree bound
// reported against sqrt(n ln n). Report-only, never gates a run.
PuReport verify_properties(const PuGraph& g, const std::vector<NodeId>& fragile);

// Debug dump, one JSONL record per primary: {"p": id, "u": [ids...]}.
void dump_adjacency(const PuGraph& g, std::ostream& os);

}  // namespace teamform
