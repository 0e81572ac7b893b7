// Command-line front end: single episodes, blockage-duration sweeps,
// optimizer-only solves and topology dumps.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mcrsim/harness.hpp"

namespace {

using namespace mcrsim;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> policy;
};

ScenarioConfig resolve(const Common& c) {
  ScenarioConfig config = c.config_path.empty() ? ScenarioConfig{} : load_config(c.config_path);
  if (c.seed) config.seed = *c.seed;
  if (c.policy) config.stage_policy = parse_policy(*c.policy);
  validate(config);
  return config;
}

// Writes to the named file, or stdout when the path is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  fn(f);
}

void add_common(CLI::App* cmd, Common& c, bool with_policy) {
  cmd->add_option("--config", c.config_path, "Scenario JSON file (defaults when omitted)");
  cmd->add_option("--seed", c.seed, "Master seed, overrides the config");
  cmd->add_option("--out", c.out, "Output path, stdout when omitted");
  if (with_policy)
    cmd->add_option("--policy", c.policy, "Stage policy")
        ->check(CLI::IsMember({"S1", "S1S2", "S1S2S3", "TDMA"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-criticality uplink RSMA simulator with event-triggered resilience stages"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "Simulate one episode and write the time-series CSV");
  add_common(run, run_opts, true);

  Common sweep_opts;
  std::size_t runs = 20;
  std::vector<double> durations{50, 100, 200, 300, 400, 500};
  std::vector<std::string> policies{"S1", "S1S2", "S1S2S3"};
  double p_b = 0.05;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over mean blockage durations");
  add_common(sweep, sweep_opts, false);
  sweep->add_option("--runs", runs, "Episodes per sweep point")->check(CLI::PositiveNumber);
  sweep->add_option("--durations", durations, "Mean blockage durations in ms");
  sweep->add_option("--policy", policies, "Stage policies to compare")
      ->check(CLI::IsMember({"S1", "S1S2", "S1S2S3", "TDMA"}));
  sweep->add_option("--pb", p_b, "Long-run blocked fraction held fixed across durations");
  sweep->add_option("--threads", threads, "Worker threads, 0 for all cores");

  Common solve_opts;
  int stage = 1;
  std::vector<std::string> blocked;
  auto* solve = app.add_subcommand("solve", "Run the power optimizer and print JSON");
  add_common(solve, solve_opts, false);
  solve->add_option("--stage", stage, "1: separate decoding, 3: central decoding")
      ->check(CLI::IsMember({1, 3}));
  solve->add_option("--blocked", blocked, "Detected-blocked link AP:UE (1-based), stage 3 only");

  Common topo_opts;
  auto* topology = app.add_subcommand("topology", "Print the resolved topology as JSON");
  add_common(topology, topo_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto config = resolve(run_opts);
      const auto trace = run_episode(config, config.seed);
      emit(run_opts.out, [&](std::ostream& os) { write_timeseries_csv(os, trace); });
      for (const auto& w : trace.warnings) std::cerr << "warning: " << w << '\n';
      for (std::size_t i = 0; i < trace.metrics.size(); ++i) {
        const auto& m = trace.metrics[i];
        std::cerr << "ue " << i + 1 << ": tau_hc=" << m.tau_hc.value_or(0)
                  << " tau_lc=" << m.tau_lc.value_or(0) << " exceed_hc=" << m.exceed_hc
                  << " exceed_lc=" << m.exceed_lc << '\n';
      }
    } else if (*sweep) {
      const auto config = resolve(sweep_opts);
      SweepSpec spec;
      spec.durations_ms = durations;
      for (const auto& p : policies) spec.policies.push_back(parse_policy(p));
      spec.n_runs = runs;
      spec.blockage_probability = p_b;
      spec.threads = threads;
      const auto points = run_sweep(config, spec);
      emit(sweep_opts.out, [&](std::ostream& os) { write_summary_csv(os, points); });
    } else if (*solve) {
      const auto config = resolve(solve_opts);
      const auto topo = episode_topology(config, config.seed);
      OptimizationResult result;
      if (stage == 1) {
        result = solve_stage1(config, topo);
      } else {
        LinkFlags beta_hat{std::vector<bool>(config.n_users, true),
                           std::vector<bool>(config.n_users, true)};
        for (const auto& link : blocked) {
          const auto colon = link.find(':');
          if (colon == std::string::npos) throw ConfigError("--blocked expects AP:UE");
          const auto ap = std::stoul(link.substr(0, colon));
          const auto ue = std::stoul(link.substr(colon + 1));
          if (ap < 1 || ap > kNumAps || ue < 1 || ue > config.n_users)
            throw ConfigError("--blocked link out of range: " + link);
          beta_hat[ap - 1][ue - 1] = false;
        }
        result = solve_stage3(config, topo, beta_hat);
      }
      nlohmann::json j = to_json(result);
      j["stage"] = stage;
      emit(solve_opts.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    } else if (*topology) {
      const auto config = resolve(topo_opts);
      const auto j = to_json(episode_topology(config, config.seed));
      emit(topo_opts.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
