#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "teamform/experiment.hpp"

namespace teamform::test {

// Independent reconstruction of token paths from the wire records alone:
// replays injections, transports (with their stamps) and formations over
// per-port counters and FIFO holding queues. Covers plain single-instance
// runs; used to cross-check the live trace bookkeeping.
struct TraceOracle {
  struct Token {
    NodeId origin = -1;
    std::vector<std::pair<NodeId, Tick>> path;  // temporal hops, oldest first
  };
  struct Formation {
    std::uint64_t id = 0;
    NodeId former = -1;
    Tick at = 0;
    std::vector<Token> members;
  };

  std::vector<Formation> formations;
  std::map<std::uint64_t, std::map<NodeId, std::int64_t>> origin_notified;
  std::vector<std::string> errors;

  TraceOracle(const ExecutionLog& log, std::int64_t sigma) {
    std::map<std::uint64_t, TraceTree::PortCounters> ports;
    auto port_key = [](NodeId a, NodeId b) {
      return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
             static_cast<std::uint32_t>(b);
    };
    // holdings keyed by (node, role): a mediator's in-relay buffer never
    // mixes with the same node's primary holdings
    std::map<std::pair<NodeId, int>, std::deque<Token>> held;
    std::map<std::int64_t, std::vector<Token>> flying;  // by envelope id

    for (const auto& r : log.records) {
      if (r.instance != 0) continue;
      switch (r.kind) {
        case RecordKind::Inject: {
          for (std::int64_t i = 0; i < r.a; ++i) {
            Token t;
            t.origin = r.node;
            t.path.push_back({r.node, r.t});
            held[{r.node, 0}].push_back(t);
          }
          break;
        }
        case RecordKind::Send: {
          if (!r.has_msg || r.msg != MsgType::Transport) break;
          auto& ctr = ports[port_key(r.node, r.peer)];
          if (static_cast<std::uint64_t>(r.c) != ctr.outgoing)
            errors.push_back("outgoing stamp mismatch @" +
                             std::to_string(r.seq));
          ctr.outgoing += static_cast<std::uint64_t>(r.a);
          auto& q = held[{r.node, r.role == Role::Utility ? 1 : 0}];
          if (static_cast<std::int64_t>(q.size()) < r.a) {
            errors.push_back("transport exceeds held tokens @" +
                             std::to_string(r.seq));
            break;
          }
          std::vector<Token> batch;
          for (std::int64_t i = 0; i < r.a; ++i) {
            batch.push_back(q.front());
            q.pop_front();
          }
          flying[r.d] = std::move(batch);
          break;
        }
        case RecordKind::Deliver: {
          if (!r.has_msg || r.msg != MsgType::Transport) break;
          auto& ctr = ports[port_key(r.node, r.peer)];
          if (static_cast<std::uint64_t>(r.c) != ctr.incoming)
            errors.push_back("incoming stamp mismatch @" +
                             std::to_string(r.seq));
          ctr.incoming += static_cast<std::uint64_t>(r.a);
          auto it = flying.find(r.d);
          if (it == flying.end()) break;
          for (auto& t : it->second) {
            t.path.push_back({r.node, r.t});
            held[{r.node, r.role == Role::Utility ? 1 : 0}].push_back(t);
          }
          flying.erase(it);
          break;
        }
        case RecordKind::TeamForm: {
          Formation f;
          f.id = static_cast<std::uint64_t>(r.d);
          f.former = r.node;
          f.at = r.t;
          auto& q = held[{r.node, 0}];
          for (std::int64_t i = 0; i < r.a * sigma && !q.empty(); ++i) {
            f.members.push_back(q.front());
            q.pop_front();
          }
          if (static_cast<std::int64_t>(f.members.size()) != r.a * sigma)
            errors.push_back("formation exceeds held tokens @" +
                             std::to_string(r.seq));
          formations.push_back(std::move(f));
          break;
        }
        case RecordKind::OriginNotify: {
          origin_notified[static_cast<std::uint64_t>(r.d)][r.node] += r.a;
          break;
        }
        default:
          break;
      }
    }
  }

  // Tree property: any two member paths of one formation intersect exactly in
  // a common suffix (they merge once and stay merged toward the root).
  bool tree_property() const {
    for (const auto& f : formations) {
      for (std::size_t i = 0; i < f.members.size(); ++i) {
        for (std::size_t j = i + 1; j < f.members.size(); ++j) {
          const auto& a = f.members[i].path;
          const auto& b = f.members[j].path;
          std::size_t L = 0;  // longest common suffix
          while (L < a.size() && L < b.size() &&
                 a[a.size() - 1 - L] == b[b.size() - 1 - L])
            ++L;
          std::set<std::pair<NodeId, Tick>> rest_a(a.begin(),
                                                   a.end() - static_cast<long>(L));
          for (std::size_t k = 0; k + L < b.size(); ++k)
            if (rest_a.count(b[k])) return false;
        }
      }
    }
    return true;
  }

  // Paths are simple in the temporal graph: no (node, time) point repeats.
  bool paths_simple() const {
    for (const auto& f : formations)
      for (const auto& m : f.members) {
        std::set<std::pair<NodeId, Tick>> seen(m.path.begin(), m.path.end());
        if (seen.size() != m.path.size()) return false;
      }
    return true;
  }

  bool paths_end_at_former() const {
    for (const auto& f : formations)
      for (const auto& m : f.members)
        if (m.path.empty() || m.path.back().first != f.former) return false;
    return true;
  }

  // Every member token's injection node got exactly its share of callbacks.
  bool origins_complete() const {
    for (const auto& f : formations) {
      std::map<NodeId, std::int64_t> want;
      for (const auto& m : f.members) ++want[m.origin];
      auto it = origin_notified.find(f.id);
      if (it == origin_notified.end()) return false;
      if (it->second != want) return false;
    }
    return true;
  }
};

}  // namespace teamform::test
