#include "mcrsim/controller.hpp"

#include <algorithm>

namespace mcrsim {

ControllerConfig ControllerConfig::from(const ScenarioConfig& c) {
  return {c.stage_policy, c.n_e, c.q_max_hc, c.q_max_lc};
}

int StageState::stage() const {
  if (stage3_active) return 3;
  if (stage2_active[0] || stage2_active[1]) return 2;
  return 1;
}

Controller::Controller(ControllerConfig config, const Topology& topology, PowerAllocation stage1)
    : config_(config), topology_(&topology), stage1_(std::move(stage1)) {
  state_.over_threshold_streak.assign(topology.n_users(), 0);
  state_.active_allocation = stage1_;
}

bool Controller::over_threshold(const QueuePair& q) const {
  return static_cast<double>(q.q_hc) > config_.q_max_hc ||
         static_cast<double>(q.q_lc) > config_.q_max_lc;
}

void Controller::install_pending() {
  state_.active_allocation = std::move(*pending_);
  pending_.reset();
  state_.pending_opt_countdown.reset();
  state_.central_decoding = true;
}

TickActions Controller::tick(const std::vector<QueuePair>& queues, const LinkFlags& beta_hat) {
  TickActions actions;
  const std::size_t n = topology_->n_users();

  if (state_.pending_opt_countdown) {
    --*state_.pending_opt_countdown;
    if (*state_.pending_opt_countdown <= 0 && pending_) install_pending();
  }

  bool any_blocked = false;
  std::vector<bool> ue_blocked(n, false);
  for (std::size_t j = 0; j < kNumAps; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (!beta_hat[j][i]) ue_blocked[i] = any_blocked = true;

  if (!any_blocked) {
    const bool was_escalated = state_.stage() > 1;
    state_.stage2_active = {false, false};
    state_.stage3_active = false;
    state_.central_decoding = false;
    state_.pending_opt_countdown.reset();
    pending_.reset();
    last_snapshot_.reset();
    state_.active_allocation = stage1_;
    actions.reverted = was_escalated;
  }

  for (std::size_t i = 0; i < n; ++i)
    state_.over_threshold_streak[i] = over_threshold(queues[i]) ? state_.over_threshold_streak[i] + 1 : 0;
  if (!any_blocked) return actions;

  // Stage 3 only escalates from a Stage 2 that was already in force.
  const bool was_in_stage2 = state_.stage2_active[0] || state_.stage2_active[1];
  if (config_.allows_stage2()) {
    for (std::size_t j = 0; j < kNumAps; ++j) {
      bool trigger = false;
      for (std::size_t i = 0; i < n; ++i)
        if (topology_->assoc[i] == j && ue_blocked[i] && over_threshold(queues[i])) trigger = true;
      state_.stage2_active[j] = trigger;
    }
  }

  if (!config_.allows_stage3()) return actions;
  if (!state_.stage3_active) {
    const bool in_stage2 = was_in_stage2 && (state_.stage2_active[0] || state_.stage2_active[1]);
    const bool persistent = std::any_of(state_.over_threshold_streak.begin(),
                                        state_.over_threshold_streak.end(),
                                        [&](int s) { return s >= config_.n_e; });
    if (in_stage2 && persistent) {
      state_.stage3_active = true;
      actions.reoptimize = beta_hat;
    }
  } else if (last_snapshot_ && *last_snapshot_ != beta_hat) {
    actions.reoptimize = beta_hat;
  }
  if (actions.reoptimize) {
    last_snapshot_ = beta_hat;
    state_.pending_opt_countdown = config_.n_e;
  }
  return actions;
}

void Controller::schedule(PowerAllocation allocation) {
  pending_ = std::move(allocation);
  if (!state_.pending_opt_countdown || *state_.pending_opt_countdown <= 0) install_pending();
}

void CostCounters::update(const SlotCostEvents& events) {
  ++slots_;
  mc_events_ += std::count(events.multi_connectivity.begin(), events.multi_connectivity.end(), true);
  for (std::size_t j = 0; j < kNumAps; ++j) coop_events_[j] += events.forwarding[j] ? 1 : 0;
  opt_events_ += events.optimizer_run ? 1 : 0;
}

double CostCounters::rho_mc() const {
  if (slots_ == 0 || n_users_ == 0) return 0.0;
  return static_cast<double>(mc_events_) / (static_cast<double>(slots_) * static_cast<double>(n_users_));
}

double CostCounters::rho_coop(std::size_t ap) const {
  return slots_ == 0 ? 0.0 : static_cast<double>(coop_events_[ap]) / static_cast<double>(slots_);
}

double CostCounters::rho_opt() const {
  return slots_ == 0 ? 0.0 : static_cast<double>(opt_events_) / static_cast<double>(slots_);
}

PerAp<bool> forwarding_aps(const StageState& state) {
  if (state.stage3_active) return {true, true};
  return {state.stage2_active[1], state.stage2_active[0]};
}

}  // namespace mcrsim
