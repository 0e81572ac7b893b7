#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcrsim/phy.hpp"
#include "mcrsim/scenario.hpp"

namespace mcrsim {

/// Approximate per-message decoding success probabilities.
struct SuccessProbs {
  PerAp<std::vector<double>> p_hc;   // at each AP
  std::vector<double> p_lc;          // at the serving AP
  std::vector<double> p_hc_combined; // at either AP
};

/// Own link unblocked and no earlier-decoded message hit by an undetected
/// blockage. The verbatim model reproduces the printed expressions, which
/// give zero for the first-decoded message.
SuccessProbs success_probs_stage1(double p_b, double kappa_b, double slot_s,
                                  const PerAp<std::vector<std::size_t>>& order,
                                  std::size_t n_users, SuccessModel model);

/// P(P_a or P_b) = P_a + (1 - P_a) P_b.
double either_success(double p_a, double p_b);

/// Probability that no link changes its LoS state within a slot (corrected),
/// or the printed expression (verbatim).
double success_prob_stage3(double kappa_b, double mu_b, double slot_s, std::size_t n_unblocked,
                           std::size_t n_total_links, SuccessModel model);

/// One SINR branch num/den with num = signal_gain * p[var] and
/// den = noise + sum_v interference[v] * p[v].
struct SinrBranch {
  double signal_gain = 0;
  std::vector<double> interference;  // one coefficient per power variable
  double noise = 1;
};

/// B log2(1 + sum_b num_b/den_b) >= required_bps * delta.
struct RateConstraint {
  std::size_t ue = 0;
  Criticality cls = Criticality::kHigh;
  double required_bps = 0;  // rate that gives delta = 1
  std::vector<SinrBranch> branches;

  std::size_t var() const { return 2 * ue + (cls == Criticality::kHigh ? 0 : 1); }
};

/// max_p min delta subject to rate constraints and per-UE power budgets.
/// Power variables are ordered (p_hc[0], p_lc[0], p_hc[1], ...).
struct MaxMinProblem {
  std::size_t n_users = 0;
  double p_max_w = 0;
  double bandwidth_hz = 0;
  std::vector<RateConstraint> constraints;
};

struct SolverIterate {
  double inner_objective = 0;  // optimum of the convexified subproblem
  double objective = 0;        // true min delta at the iterate
};

struct SolverReport {
  std::vector<SolverIterate> trace;
  std::size_t iterations = 0;
  bool converged = false;
  bool stable = false;      // min delta > 1
  bool degenerate = false;  // some required rate is unreachable (zero success probability)
  std::vector<std::vector<double>> y;  // transform variables of the last subproblem, scaled units (unit noise, powers / p_max)
  std::string message;
};

/// Inverse utilization per message.
struct StabilityTargets {
  std::vector<double> delta_hc;
  std::vector<double> delta_lc;

  double min() const;
};

struct SolverOptions {
  std::size_t max_iterations = 200;
  double tolerance = 1e-6;
  /// Duality-gap target of each barrier solve, relative to max(1, |delta|).
  double barrier_gap = 1e-10;
};

struct OptimizationResult {
  PowerAllocation allocation;
  StabilityTargets targets;
  SolverReport report;
};

/// Rate of a constraint at the given powers, in bit/s.
double constraint_rate(const RateConstraint& c, const PowerAllocation& p, double bandwidth_hz);

/// delta per message: the smallest rate-over-requirement ratio among the
/// message's constraints; infinite when a class carries no traffic.
StabilityTargets evaluate_targets(const MaxMinProblem& problem, const PowerAllocation& p);

/// Successive convex approximation with the quadratic transform
/// num/den >= 2 y sqrt(num) - y^2 den, starting from the equal power split.
OptimizationResult solve_max_min(const MaxMinProblem& problem, const SolverOptions& options = {});

struct TrafficModel {
  double hc_packets_per_slot = 0;
  double lc_packets_per_slot = 0;
  double slot_s = 0;
  double packet_bits = 0;
};

TrafficModel traffic_of(const ScenarioConfig& config);

/// Separate decoding at both APs with average gains: HC must be decodable at
/// both APs, LC at the serving AP.
MaxMinProblem stage1_problem(const Topology& topology, const GainMatrix& avg_gain,
                             const TrafficModel& traffic, const SuccessProbs& probs,
                             double bandwidth_hz, double p_max_w);

/// Central decoding with diagonal per-AP noise; each message's rate is the
/// MRC form of the rank-1 determinant rate.
MaxMinProblem stage3_problem(const GainMatrix& avg_gain, std::span<const std::size_t> order,
                             const PerAp<double>& noise, const TrafficModel& traffic,
                             double p_any, double bandwidth_hz, double p_max_w);

OptimizationResult solve_stage1(const ScenarioConfig& config, const Topology& topology,
                                const SolverOptions& options = {});

/// Re-optimization for central decoding under a detected-blockage snapshot.
OptimizationResult solve_stage3(const ScenarioConfig& config, const Topology& topology,
                                const LinkFlags& beta_hat, const SolverOptions& options = {});

}  // namespace mcrsim
