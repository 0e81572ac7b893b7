#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mcrsim/controller.hpp"
#include "mcrsim/optimizer.hpp"
#include "mcrsim/scenario.hpp"

namespace mcrsim {

// ---------------------------------------------------------------------------
// Configuration files

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::string& path);

nlohmann::json to_json(const Topology& topology);
nlohmann::json to_json(const OptimizationResult& result);

/// FNV-1a over the canonical JSON form, printed as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

/// Replaces sampled blockage with a replayed schedule.
ScenarioConfig scripted_blockage(ScenarioConfig config, std::vector<BlockageInterval> schedule);

// ---------------------------------------------------------------------------
// Episodes

struct SlotRecord {
  std::int64_t t = 0;
  int stage = 1;
  bool central_decoding = false;  // the Stage-3 allocation was in force
  std::vector<std::int64_t> q_hc, q_lc;      // backlog after service
  std::vector<std::int64_t> del_hc, del_lc;  // packets removed this slot
  LinkFlags beta, beta_hat;
  SlotCostEvents costs;
};

struct UeMetrics {
  std::optional<double> tau_hc, tau_lc;  // Little's-law delay in slots
  double exceed_hc = 0, exceed_lc = 0;
};

struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::string config_hash;
  Topology topology;
  std::vector<SlotRecord> slots;
  std::vector<QueuePair> final_queues;
  std::vector<UeMetrics> metrics;  // over post-warm-up slots
  CostCounters costs;
  double stage2_fraction = 0;  // share of post-warm-up slots with S = 2
  double stage3_fraction = 0;
  std::size_t optimizer_runs = 0;
  std::vector<std::string> warnings;
};

struct EpisodeOptions {
  bool keep_slots = true;  // false drops per-slot records after metrics
};

/// Topology for an episode: fixed positions if configured, else placed with
/// the episode's placement stream.
Topology episode_topology(const ScenarioConfig& config, std::uint64_t episode_seed);

EpisodeTrace run_episode(const ScenarioConfig& config, std::uint64_t seed,
                         const EpisodeOptions& options = {});

/// Seed of run `index` of a sweep. Shared by every duration and policy so
/// that policies are compared on common random numbers.
std::uint64_t episode_seed(std::uint64_t master, std::size_t index);

// ---------------------------------------------------------------------------
// Sweeps

struct MeanStderr {
  double mean = 0;
  double stderr_ = 0;
};

struct SweepPoint {
  double duration_ms = 0;
  StagePolicy policy = StagePolicy::kS1;
  std::size_t n_runs = 0;
  MeanStderr tau_hc_worst, tau_lc_worst, exceed_hc, exceed_lc;
  MeanStderr rho_mc, rho_coop_sum, rho_opt;
  MeanStderr stage2_fraction, stage3_fraction;
};

struct SweepSpec {
  std::vector<double> durations_ms;
  std::vector<StagePolicy> policies;
  std::size_t n_runs = 20;
  double blockage_probability = 0.05;
  unsigned threads = 0;  // 0: hardware concurrency
};

std::vector<SweepPoint> run_sweep(const ScenarioConfig& base, const SweepSpec& spec);

MeanStderr mean_stderr(const std::vector<double>& samples);

// ---------------------------------------------------------------------------
// CSV output

void write_timeseries_csv(std::ostream& out, const EpisodeTrace& trace);
void write_summary_csv(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace mcrsim
