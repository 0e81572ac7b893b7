#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcrsim/rng.hpp"
#include "mcrsim/types.hpp"

namespace mcrsim {

enum class StagePolicy { kS1, kS1S2, kS1S2S3, kTdma };

/// Closed-form success-probability variant used by the power optimizer.
/// kVerbatim keeps the printed expressions for comparison runs.
enum class SuccessModel { kCorrected, kVerbatim };

/// Which gains drive the per-AP SIC order during decoding.
enum class OrderMode { kPerSlot, kAverage };

std::string to_string(StagePolicy policy);
StagePolicy parse_policy(const std::string& name);
std::string to_string(SuccessModel model);
SuccessModel parse_success_model(const std::string& name);

/// One scripted LoS outage: link (ap, ue) is blocked on slots [start, end].
struct BlockageInterval {
  std::size_t ap = 0;
  std::size_t ue = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct ScenarioConfig {
  double area_width_m = 150.0;
  double area_height_m = 150.0;
  std::vector<Point> ap_positions{{0.0, 0.0}, {150.0, 150.0}};
  std::size_t n_users = 2;
  double min_ap_distance_m = 50.0;
  double rician_k = 20.0;  // linear
  double noise_psd_dbm_hz = -174.0;
  double bandwidth_hz = 4e6;
  double p_max_dbm = 10.0;
  double packet_bits = 1000.0;
  double slot_s = 0.01;
  double arrival_bps = 10e6;
  double hc_fraction = 0.5;
  double kappa_b = 0.0;  // blockers per second
  double mu_b = 1.0 / 0.3;
  int nq = 10;
  double q_max_hc = 300.0;
  double q_max_lc = 1000.0;
  int n_e = 10;
  StagePolicy stage_policy = StagePolicy::kS1S2S3;
  SuccessModel success_model = SuccessModel::kCorrected;
  std::uint64_t seed = 1;

  // Episode controls.
  std::int64_t n_slots = 5000;
  std::int64_t warmup_slots = 500;
  OrderMode decoding_order = OrderMode::kPerSlot;
  // When set, the blockage process replays these intervals instead of sampling.
  std::optional<std::vector<BlockageInterval>> blockage_schedule;
  // When set, UEs sit at these points instead of being placed at random.
  std::optional<std::vector<Point>> ue_positions;

  double noise_power_w() const;
  double p_max_w() const;
  /// Mean packets per slot per UE, before the criticality split.
  double arrivals_per_slot() const;
  double hc_arrivals_per_slot() const { return hc_fraction * arrivals_per_slot(); }
  double lc_arrivals_per_slot() const { return (1.0 - hc_fraction) * arrivals_per_slot(); }
  /// Long-run blocked fraction implied by kappa_b and mu_b.
  double blockage_probability() const;
  std::size_t n_links() const { return kNumAps * n_users; }
};

/// Throws ConfigError naming the first violated constraint.
void validate(const ScenarioConfig& config);

struct Topology {
  std::vector<Point> ue_positions;
  GainMatrix pathloss_gain;            // [ap][ue], linear
  std::vector<std::size_t> assoc;      // serving AP per UE
  PerAp<std::vector<std::size_t>> order;  // UE indices in decoding order per AP
  PerAp<double> noise_power{};         // Watts

  std::size_t n_users() const { return ue_positions.size(); }
  /// 1-based rank of `ue` in the decoding order at `ap`.
  std::size_t rank(std::size_t ap, std::size_t ue) const;
  std::vector<std::size_t> users_of(std::size_t ap) const;
};

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kPlacementBudget = 1'000'000;

/// Uniform placement with rejection of points closer than min_ap_distance_m
/// to any AP. Also fills path-loss gains and noise power, then associates.
Topology place_users(const ScenarioConfig& config, Engine& rng);

/// Builds a topology from explicit UE coordinates.
Topology make_topology(const ScenarioConfig& config, std::vector<Point> ue_positions);

/// 128.1 + 37.6 log10(d) with d in km.
double path_loss_db(double d_km);
double db_to_linear_gain(double loss_db);

/// Sorts UE indices by descending gain; equal gains keep the lower index first.
std::vector<std::size_t> descending_order(std::span<const double> gains);

/// Associates every UE to its strongest AP (ties go to the lower AP index) and
/// seeds each AP's decoding order from the path-loss gains.
Topology associate_and_order(Topology topology);

}  // namespace mcrsim
