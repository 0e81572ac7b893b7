#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mcrsim/phy.hpp"
#include "mcrsim/queueing.hpp"
#include "mcrsim/scenario.hpp"

namespace mcrsim {

struct ControllerConfig {
  StagePolicy policy = StagePolicy::kS1S2S3;
  int n_e = 10;
  double q_max_hc = 300.0;
  double q_max_lc = 1000.0;

  static ControllerConfig from(const ScenarioConfig& config);
  bool allows_stage2() const {
    return policy == StagePolicy::kS1S2 || policy == StagePolicy::kS1S2S3;
  }
  bool allows_stage3() const { return policy == StagePolicy::kS1S2S3; }
};

struct StageState {
  PerAp<bool> stage2_active{false, false};
  bool stage3_active = false;
  std::vector<int> over_threshold_streak;
  /// Slots until the pending re-optimization takes effect, if any.
  std::optional<int> pending_opt_countdown;
  /// The Stage-3 allocation is in force and the CU decodes centrally.
  bool central_decoding = false;
  PowerAllocation active_allocation;

  int stage() const;
};

/// What the harness must do after a tick.
struct TickActions {
  /// Solve the central-decoding problem for this detected-blockage snapshot
  /// and hand the result to Controller::schedule.
  std::optional<LinkFlags> reoptimize;
  bool reverted = false;
};

/// Event-triggered escalation between the three stages.
class Controller {
 public:
  Controller(ControllerConfig config, const Topology& topology, PowerAllocation stage1);

  /// Called once per slot before rate selection with the backlog left after
  /// the previous slot's service.
  TickActions tick(const std::vector<QueuePair>& queues, const LinkFlags& beta_hat);

  /// Installs a re-optimized allocation once its delay has elapsed.
  void schedule(PowerAllocation allocation);

  const StageState& state() const { return state_; }
  const PowerAllocation& stage1_allocation() const { return stage1_; }

 private:
  bool over_threshold(const QueuePair& q) const;
  void install_pending();

  ControllerConfig config_;
  const Topology* topology_;
  PowerAllocation stage1_;
  StageState state_;
  std::optional<PowerAllocation> pending_;
  std::optional<LinkFlags> last_snapshot_;
};

/// Per-slot inputs to the cost counters.
struct SlotCostEvents {
  std::vector<bool> multi_connectivity;  // HC recovered only through the other AP
  PerAp<bool> forwarding{false, false};  // AP shipped its signal over the backhaul
  bool optimizer_run = false;
};

/// Running usage fractions of multi-connectivity, backhaul and optimizer.
class CostCounters {
 public:
  explicit CostCounters(std::size_t n_users = 0) : n_users_(n_users) {}

  void update(const SlotCostEvents& events);

  double rho_mc() const;
  double rho_coop(std::size_t ap) const;
  double rho_coop_sum() const { return rho_coop(0) + rho_coop(1); }
  double rho_opt() const;
  std::int64_t slots() const { return slots_; }

 private:
  std::size_t n_users_;
  std::int64_t slots_ = 0;
  std::int64_t mc_events_ = 0;
  PerAp<std::int64_t> coop_events_{0, 0};
  std::int64_t opt_events_ = 0;
};

/// Backhaul use implied by the stage state: the helper AP of every
/// cooperating AP in Stage 2, both APs once Stage 3 is active.
PerAp<bool> forwarding_aps(const StageState& state);

}  // namespace mcrsim
