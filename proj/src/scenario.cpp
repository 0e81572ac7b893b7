#include "mcrsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mcrsim {

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::string to_string(StagePolicy policy) {
  switch (policy) {
    case StagePolicy::kS1: return "S1";
    case StagePolicy::kS1S2: return "S1S2";
    case StagePolicy::kS1S2S3: return "S1S2S3";
    case StagePolicy::kTdma: return "TDMA";
  }
  return "?";
}

StagePolicy parse_policy(const std::string& name) {
  if (name == "S1") return StagePolicy::kS1;
  if (name == "S1S2") return StagePolicy::kS1S2;
  if (name == "S1S2S3") return StagePolicy::kS1S2S3;
  if (name == "TDMA") return StagePolicy::kTdma;
  throw ConfigError("unknown stage policy '" + name + "'");
}

std::string to_string(SuccessModel model) {
  return model == SuccessModel::kCorrected ? "corrected" : "verbatim";
}

SuccessModel parse_success_model(const std::string& name) {
  if (name == "corrected") return SuccessModel::kCorrected;
  if (name == "verbatim") return SuccessModel::kVerbatim;
  throw ConfigError("unknown success model '" + name + "'");
}

double ScenarioConfig::noise_power_w() const {
  return dbm_to_watts(noise_psd_dbm_hz) * bandwidth_hz;
}

double ScenarioConfig::p_max_w() const { return dbm_to_watts(p_max_dbm); }

double ScenarioConfig::arrivals_per_slot() const {
  return arrival_bps * slot_s / packet_bits;
}

double ScenarioConfig::blockage_probability() const {
  return kappa_b / (kappa_b + mu_b);
}

void validate(const ScenarioConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.ap_positions.size() == kNumAps, "exactly two AP positions are required");
  require(c.area_width_m > 0 && c.area_height_m > 0, "area_m must be positive");
  require(c.n_users >= 1, "n_users must be at least 1");
  require(c.min_ap_distance_m >= 0, "min_ap_distance_m must be nonnegative");
  require(c.rician_k >= 0, "rician_k must be nonnegative");
  require(c.bandwidth_hz > 0, "bandwidth_hz must be positive");
  require(c.packet_bits > 0, "packet_bits must be positive");
  require(c.slot_s > 0, "slot_s must be positive");
  require(c.arrival_bps >= 0, "arrival_bps must be nonnegative");
  require(c.hc_fraction >= 0 && c.hc_fraction <= 1, "hc_fraction must lie in [0, 1]");
  require(c.kappa_b >= 0, "kappa_b must be nonnegative");
  require(c.mu_b > 0, "mu_b must be positive");
  require(c.nq >= 1, "nq must be at least 1");
  require(c.q_max_hc > 0 && c.q_max_lc > 0, "queue thresholds must be positive");
  require(c.n_e >= 0, "n_e must be nonnegative");
  require(c.n_slots >= 1, "n_slots must be at least 1");
  require(c.warmup_slots >= 0 && c.warmup_slots < c.n_slots,
          "warmup_slots must lie in [0, n_slots)");
  if (c.blockage_schedule) {
    for (const auto& b : *c.blockage_schedule) {
      require(b.ap < kNumAps && b.ue < c.n_users, "blockage_schedule link out of range");
      require(b.start <= b.end, "blockage_schedule interval has start > end");
    }
  }
  if (c.ue_positions)
    require(c.ue_positions->size() == c.n_users, "ue_positions must list n_users points");
}

std::size_t Topology::rank(std::size_t ap, std::size_t ue) const {
  const auto& o = order[ap];
  auto it = std::find(o.begin(), o.end(), ue);
  return static_cast<std::size_t>(it - o.begin()) + 1;
}

std::vector<std::size_t> Topology::users_of(std::size_t ap) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assoc.size(); ++i)
    if (assoc[i] == ap) out.push_back(i);
  return out;
}

double path_loss_db(double d_km) {
  if (!(d_km > 0.0)) throw DomainError("path_loss_db: distance must be positive");
  return 128.1 + 37.6 * std::log10(d_km);
}

double db_to_linear_gain(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

std::vector<std::size_t> descending_order(std::span<const double> gains) {
  std::vector<std::size_t> idx(gains.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
  return idx;
}

Topology associate_and_order(Topology t) {
  const std::size_t n = t.n_users();
  t.assoc.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    t.assoc[i] = t.pathloss_gain[1][i] > t.pathloss_gain[0][i] ? 1 : 0;
  for (std::size_t j = 0; j < kNumAps; ++j) t.order[j] = descending_order(t.pathloss_gain[j]);
  return t;
}

Topology make_topology(const ScenarioConfig& config, std::vector<Point> ue_positions) {
  Topology t;
  t.ue_positions = std::move(ue_positions);
  for (std::size_t j = 0; j < kNumAps; ++j) {
    t.pathloss_gain[j].resize(t.ue_positions.size());
    for (std::size_t i = 0; i < t.ue_positions.size(); ++i) {
      const double d_km = distance(config.ap_positions[j], t.ue_positions[i]) / 1000.0;
      t.pathloss_gain[j][i] = db_to_linear_gain(path_loss_db(d_km));
    }
    t.noise_power[j] = config.noise_power_w();
  }
  return associate_and_order(std::move(t));
}

Topology place_users(const ScenarioConfig& config, Engine& rng) {
  std::uniform_real_distribution<double> ux(0.0, config.area_width_m);
  std::uniform_real_distribution<double> uy(0.0, config.area_height_m);
  std::vector<Point> positions;
  positions.reserve(config.n_users);
  std::size_t draws = 0;
  while (positions.size() < config.n_users) {
    if (draws++ >= kPlacementBudget)
      throw PlacementError("place_users: rejection budget exhausted; no feasible position");
    const Point p{ux(rng), uy(rng)};
    const bool clear = std::all_of(config.ap_positions.begin(), config.ap_positions.end(),
                                   [&](const Point& ap) {
                                     return distance(ap, p) >= config.min_ap_distance_m;
                                   });
    if (clear) positions.push_back(p);
  }
  return make_topology(config, std::move(positions));
}

}  // namespace mcrsim
