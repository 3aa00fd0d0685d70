#include "teamform/apps.hpp"

#include <cassert>

namespace teamform {

// -- leader election ----------------------------------------------------------

std::int64_t le_sigma(const LeConfig& cfg) {
  const double ln_n = std::log(static_cast<double>(cfg.n));
  return static_cast<std::int64_t>(std::ceil(
      (1.0 - cfg.epsilon / 2.0) * (0.5 + cfg.epsilon) * cfg.c_le * ln_n));
}

double le_candidate_probability(const LeConfig& cfg) {
  return std::min(1.0, cfg.c_le * std::log(static_cast<double>(cfg.n)) /
                           static_cast<double>(cfg.n));
}

LeApp::LeApp(LeConfig cfg)
    : cfg_(cfg),
      sigma_(le_sigma(cfg)),
      status_(cfg.n, LeStatus::Undecided),
      leader_port_(cfg.n, -1) {
  const double p = le_candidate_probability(cfg);
  cand_threshold_ = p >= 1.0 ? UINT64_MAX
                             : static_cast<std::uint64_t>(
                                   p * 18446744073709551616.0 /* 2^64 */);
}

void LeApp::set_status(Simulation& sim, NodeId v, LeStatus st) {
  // Statuses are sticky; the first verdict wins.
  if (status_[v] != LeStatus::Undecided) return;
  status_[v] = st;
  sim.log_event(RecordKind::AppStatus, v, Role::Primary, -1, Role::Primary, 0,
                static_cast<std::int64_t>(st));
}

void LeApp::on_node_start(Simulation& sim, TfDriver&, NodeId v) {
  const bool candidate = cand_threshold_ == UINT64_MAX ||
                         sim.node_rng(v).next() < cand_threshold_;
  if (!candidate) {
    set_status(sim, v, LeStatus::NotLeader);
    return;
  }
  ++candidates_;
  sim.schedule_app_injection(v, 0, 1, 0, 1);
}

void LeApp::team_formed(Simulation& sim, TfDriver&, NodeId v, Instance,
                        std::int64_t teams, std::int64_t term_consumed,
                        std::uint64_t) {
  formations_ += teams;
  if (status_[v] == LeStatus::Undecided) {
    set_status(sim, v, LeStatus::Leader);
    ++leaders_;
    leader_ = v;
    if (cfg_.explicit_mode) {
      Msg m;
      m.type = MsgType::LeaderAnnounce;
      for (NodeId w = 0; w < cfg_.n; ++w) {
        if (w == v) continue;
        sim.send({v, Role::Primary}, {w, Role::Primary}, 0, m);
        ++announcements_;
      }
    }
    if (!term_seeded_) {
      term_seeded_ = true;
      if (cfg_.term_tokens) {
        if (sigma_ > 1)
          sim.schedule_app_injection(v, 0, sigma_ - 1, sigma_ - 1, 1);
      } else {
        sim.schedule_app_injection(v, 0, 1, 1, 1);
      }
    }
  }
  // Formations that consumed TERM tokens regenerate them.
  if (cfg_.term_tokens && term_consumed > 0)
    sim.schedule_app_injection(v, 0, term_consumed, term_consumed, 1);
}

void LeApp::transport_received(Simulation& sim, TfDriver&, NodeId v, Instance,
                               std::int64_t, std::int64_t term) {
  if (term > 0) set_status(sim, v, LeStatus::NotLeader);
}

void LeApp::retired_by_transport(Simulation& sim, TfDriver&, NodeId v,
                                 Instance) {
  // A candidate that handed its tokens away can never form a team.
  set_status(sim, v, LeStatus::NotLeader);
}

void LeApp::extra_delivery(Simulation& sim, TfDriver&, const Envelope& env) {
  assert(env.msg.type == MsgType::LeaderAnnounce);
  leader_port_[env.dst.node] = env.src.node;
  (void)sim;
}

LeOutcome LeApp::finish(const Simulation& sim, const TfDriver& driver) {
  LeOutcome out;
  out.status = status_;
  out.leader_port = leader_port_;
  out.candidates = candidates_;
  out.leaders = leaders_;
  out.formations = formations_;
  out.announcements = announcements_;
  out.leader = leader_;
  // Accumulation-based termination: leftovers sit at one node forever; if
  // that node is the leader itself the argument leaves its verdict open and
  // we only record the case.
  for (NodeId v = 0; v < cfg_.n; ++v) {
    if (driver.instance(0).busy(v) && status_[v] == LeStatus::Leader)
      out.accumulator_is_leader = true;
  }
  (void)sim;
  return out;
}

// -- vector team formation -------------------------------------------------

namespace {
int pow2_at_least(int m) {
  int p = 1;
  while (p < m) p <<= 1;
  return p;
}
}  // namespace

VtfApp::VtfApp(VtfConfig cfg) : cfg_(std::move(cfg)) {
  m_real_ = static_cast<int>(cfg_.sigma_vec.size());
  assert(m_real_ >= 1);
  m_padded_ = pow2_at_least(m_real_);
  const int total = m_padded_ == 1 ? 1 : m_padded_ + (m_padded_ - 1);
  slots_.resize(total);
  out_.color_teams.assign(m_real_, 0);
  out_.pair_formations.assign(total, 0);

  for (int i = 0; i < m_padded_; ++i) slots_[i].real = i < m_real_;
  // Combining tree laid out level by level above the leaves.
  int level_base = 0, level_size = m_padded_, next = m_padded_;
  while (level_size > 1) {
    for (int i = 0; i < level_size; i += 2) {
      const int parent = next + i / 2;
      slots_[level_base + i].parent = static_cast<Instance>(parent);
      slots_[level_base + i].side = 1;
      slots_[level_base + i + 1].parent = static_cast<Instance>(parent);
      slots_[level_base + i + 1].side = 2;
      slots_[parent].real =
          slots_[level_base + i].real || slots_[level_base + i + 1].real;
    }
    level_base = next;
    next += level_size / 2;
    level_size /= 2;
  }
  root_ = static_cast<Instance>(total - 1);
}

std::vector<TfParams> VtfApp::instance_params() const {
  std::vector<TfParams> params;
  for (int i = 0; i < m_padded_; ++i) {
    TfParams p;
    p.instance = static_cast<Instance>(i);
    p.sigma = i < m_real_ ? cfg_.sigma_vec[i] : 2;
    params.push_back(p);
  }
  for (int i = m_padded_; i < static_cast<int>(slots_.size()); ++i) {
    TfParams p;
    p.instance = static_cast<Instance>(i);
    p.sigma = 2;
    p.diff_mode = true;
    params.push_back(p);
  }
  return params;
}

void VtfApp::emit_super_token(Simulation& sim, NodeId node, Instance from,
                              std::int64_t count) {
  // Climb over pairings whose sibling branch is padding only.
  Instance at = from;
  while (at != root_) {
    const Instance parent = slots_[at].parent;
    const std::uint8_t sibling_side = slots_[at].side == 1 ? 2 : 1;
    bool sibling_real = false;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (static_cast<Instance>(i) != at && slots_[i].parent == parent &&
          slots_[i].side == sibling_side && slots_[i].real) {
        sibling_real = true;
        break;
      }
    }
    if (sibling_real) {
      for (std::int64_t k = 0; k < count; ++k)
        sim.schedule_app_injection(node, parent, 1, 0, slots_[at].side);
      return;
    }
    at = parent;
  }
  out_.vector_teams += count;  // root reached through padding alone
}

void VtfApp::team_formed(Simulation& sim, TfDriver&, NodeId node, Instance inst,
                         std::int64_t teams, std::int64_t, std::uint64_t) {
  if (inst < static_cast<Instance>(m_padded_)) {
    if (inst < static_cast<Instance>(m_real_)) out_.color_teams[inst] += teams;
    if (m_padded_ == 1) {
      out_.vector_teams += teams;  // single-color palette: plain gathering
      return;
    }
    emit_super_token(sim, node, inst, teams);
    return;
  }
  out_.pair_formations[inst] += teams;
  if (inst == root_) {
    out_.vector_teams += teams;
    return;
  }
  emit_super_token(sim, node, inst, teams);
}

}  // namespace teamform
