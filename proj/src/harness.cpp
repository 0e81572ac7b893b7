#include "mcrsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include "mcrsim/blockage.hpp"
#include "mcrsim/channel.hpp"

namespace mcrsim {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration files

namespace {

const std::set<std::string> kConfigKeys = {
    "area_m", "ap_positions", "n_users", "min_ap_distance_m", "rician_k", "noise_psd_dbm_hz",
    "bandwidth_hz", "p_max_dbm", "packet_bits", "slot_s", "arrival_bps", "hc_fraction",
    "kappa_b", "mu_b", "blockage_probability", "mean_blockage_duration_s", "nq", "q_max_hc",
    "q_max_lc", "n_e", "stage_policy", "success_model", "seed", "n_slots", "warmup_slots",
    "decoding_order", "blockage_schedule", "ue_positions"};

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("points are written as [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_to(const Point& p) { return json::array({p.x, p.y}); }

OrderMode parse_order(const std::string& name) {
  if (name == "per_slot") return OrderMode::kPerSlot;
  if (name == "average") return OrderMode::kAverage;
  throw ConfigError("unknown decoding_order '" + name + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kConfigKeys.count(key)) throw ConfigError("unknown configuration key '" + key + "'");

  ScenarioConfig c;
  try {
    if (j.contains("area_m")) {
      const Point a = point_from(j["area_m"]);
      c.area_width_m = a.x;
      c.area_height_m = a.y;
    }
    if (j.contains("ap_positions")) {
      c.ap_positions.clear();
      for (const auto& p : j["ap_positions"]) c.ap_positions.push_back(point_from(p));
    }
    read(j, "n_users", c.n_users);
    read(j, "min_ap_distance_m", c.min_ap_distance_m);
    read(j, "rician_k", c.rician_k);
    read(j, "noise_psd_dbm_hz", c.noise_psd_dbm_hz);
    read(j, "bandwidth_hz", c.bandwidth_hz);
    read(j, "p_max_dbm", c.p_max_dbm);
    read(j, "packet_bits", c.packet_bits);
    read(j, "slot_s", c.slot_s);
    read(j, "arrival_bps", c.arrival_bps);
    read(j, "hc_fraction", c.hc_fraction);
    read(j, "kappa_b", c.kappa_b);
    read(j, "mu_b", c.mu_b);
    if (j.contains("blockage_probability") || j.contains("mean_blockage_duration_s")) {
      if (j.contains("kappa_b") || j.contains("mu_b"))
        throw ConfigError("give either kappa_b/mu_b or blockage_probability/mean_blockage_duration_s");
      const auto r = rates_for_target(j.at("blockage_probability").get<double>(),
                                      j.at("mean_blockage_duration_s").get<double>());
      c.kappa_b = r.kappa_b;
      c.mu_b = r.mu_b;
    }
    read(j, "nq", c.nq);
    read(j, "q_max_hc", c.q_max_hc);
    read(j, "q_max_lc", c.q_max_lc);
    read(j, "n_e", c.n_e);
    if (j.contains("stage_policy")) c.stage_policy = parse_policy(j["stage_policy"].get<std::string>());
    if (j.contains("success_model"))
      c.success_model = parse_success_model(j["success_model"].get<std::string>());
    read(j, "seed", c.seed);
    read(j, "n_slots", c.n_slots);
    read(j, "warmup_slots", c.warmup_slots);
    if (j.contains("decoding_order")) c.decoding_order = parse_order(j["decoding_order"].get<std::string>());
    if (j.contains("blockage_schedule")) {
      std::vector<BlockageInterval> schedule;
      for (const auto& b : j["blockage_schedule"]) {
        const auto ap = b.at("ap").get<std::size_t>();
        const auto ue = b.at("ue").get<std::size_t>();
        if (ap < 1 || ue < 1) throw ConfigError("blockage_schedule uses 1-based ap and ue");
        schedule.push_back({ap - 1, ue - 1, b.at("start").get<std::int64_t>(), b.at("end").get<std::int64_t>()});
      }
      c.blockage_schedule = std::move(schedule);
    }
    if (j.contains("ue_positions")) {
      std::vector<Point> pts;
      for (const auto& p : j["ue_positions"]) pts.push_back(point_from(p));
      c.ue_positions = std::move(pts);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  validate(c);
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["area_m"] = json::array({c.area_width_m, c.area_height_m});
  j["ap_positions"] = json::array();
  for (const auto& p : c.ap_positions) j["ap_positions"].push_back(point_to(p));
  j["n_users"] = c.n_users;
  j["min_ap_distance_m"] = c.min_ap_distance_m;
  j["rician_k"] = c.rician_k;
  j["noise_psd_dbm_hz"] = c.noise_psd_dbm_hz;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["p_max_dbm"] = c.p_max_dbm;
  j["packet_bits"] = c.packet_bits;
  j["slot_s"] = c.slot_s;
  j["arrival_bps"] = c.arrival_bps;
  j["hc_fraction"] = c.hc_fraction;
  j["kappa_b"] = c.kappa_b;
  j["mu_b"] = c.mu_b;
  j["nq"] = c.nq;
  j["q_max_hc"] = c.q_max_hc;
  j["q_max_lc"] = c.q_max_lc;
  j["n_e"] = c.n_e;
  j["stage_policy"] = to_string(c.stage_policy);
  j["success_model"] = to_string(c.success_model);
  j["seed"] = c.seed;
  j["n_slots"] = c.n_slots;
  j["warmup_slots"] = c.warmup_slots;
  j["decoding_order"] = c.decoding_order == OrderMode::kPerSlot ? "per_slot" : "average";
  if (c.blockage_schedule) {
    j["blockage_schedule"] = json::array();
    for (const auto& b : *c.blockage_schedule)
      j["blockage_schedule"].push_back({{"ap", b.ap + 1}, {"ue", b.ue + 1}, {"start", b.start}, {"end", b.end}});
  }
  if (c.ue_positions) {
    j["ue_positions"] = json::array();
    for (const auto& p : *c.ue_positions) j["ue_positions"].push_back(point_to(p));
  }
  return j;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

json to_json(const Topology& t) {
  json j;
  j["ue_positions"] = json::array();
  for (const auto& p : t.ue_positions) j["ue_positions"].push_back(point_to(p));
  j["pathloss_gain"] = {t.pathloss_gain[0], t.pathloss_gain[1]};
  json assoc = json::array(), order = json::array();
  for (auto a : t.assoc) assoc.push_back(a + 1);
  for (const auto& o : t.order) {
    json row = json::array();
    for (auto i : o) row.push_back(i + 1);
    order.push_back(row);
  }
  j["assoc"] = assoc;  // 1-based AP
  j["order"] = order;  // 1-based UE indices per AP
  j["noise_power_w"] = {t.noise_power[0], t.noise_power[1]};
  return j;
}

json to_json(const OptimizationResult& r) {
  json j;
  j["p_hc_w"] = r.allocation.p_hc;
  j["p_lc_w"] = r.allocation.p_lc;
  auto finite_or_null = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return a;
  };
  j["delta_hc"] = finite_or_null(r.targets.delta_hc);
  j["delta_lc"] = finite_or_null(r.targets.delta_lc);
  j["min_delta"] = r.targets.min();
  json trace = json::array();
  for (const auto& it : r.report.trace)
    trace.push_back({{"inner_objective", it.inner_objective}, {"objective", it.objective}});
  j["trace"] = trace;
  j["iterations"] = r.report.iterations;
  j["converged"] = r.report.converged;
  j["stable"] = r.report.stable;
  j["degenerate"] = r.report.degenerate;
  j["message"] = r.report.message;
  return j;
}

std::string config_hash(const ScenarioConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScenarioConfig scripted_blockage(ScenarioConfig config, std::vector<BlockageInterval> schedule) {
  config.blockage_schedule = merge_schedule(std::move(schedule));
  validate(config);
  return config;
}

// ---------------------------------------------------------------------------
// Episodes

Topology episode_topology(const ScenarioConfig& config, std::uint64_t seed) {
  if (config.ue_positions) return make_topology(config, *config.ue_positions);
  Engine rng = make_engine(seed, Stream::kPlacement);
  return place_users(config, rng);
}

std::uint64_t episode_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, Stream::kEpisode, index);
}

namespace {

std::vector<bool> flatten(const LinkFlags& f) {
  std::vector<bool> v(f[0]);
  v.insert(v.end(), f[1].begin(), f[1].end());
  return v;
}

// Splits a merged TDMA backlog into its HC share and the remainder.
std::pair<std::int64_t, std::int64_t> split_merged(std::int64_t q, double hc_fraction) {
  const auto hc = static_cast<std::int64_t>(std::llround(hc_fraction * static_cast<double>(q)));
  return {hc, q - hc};
}

}  // namespace

EpisodeTrace run_episode(const ScenarioConfig& config, std::uint64_t seed,
                         const EpisodeOptions& options) {
  validate(config);
  EpisodeTrace trace;
  trace.seed = seed;
  trace.config_hash = config_hash(config);
  trace.topology = episode_topology(config, seed);
  const Topology& topo = trace.topology;
  const std::size_t n = topo.n_users();
  const bool tdma = config.stage_policy == StagePolicy::kTdma;
  const double p_max = config.p_max_w();

  BlockageProcess blockage(config, seed);
  auto fading = make_fading_engines(seed, n);
  std::vector<Engine> arrival_rngs;
  for (std::size_t i = 0; i < n; ++i) arrival_rngs.push_back(make_engine(seed, Stream::kArrivals, i));

  PowerAllocation stage1 = PowerAllocation::equal_split(n, p_max);
  if (!tdma) {
    auto s1 = solve_stage1(config, topo);
    if (!s1.report.stable)
      trace.warnings.push_back("stage-1 allocation not mean-rate stable: min delta " +
                               std::to_string(s1.targets.min()));
    stage1 = std::move(s1.allocation);
  }
  const ControllerConfig ctrl_config = ControllerConfig::from(config);
  Controller controller(ctrl_config, topo, stage1);
  std::map<std::vector<bool>, PowerAllocation> stage3_cache;
  const PerAp<double> cu_noise{forwarded_noise(topo, config.nq, p_max, 0),
                               forwarded_noise(topo, config.nq, p_max, 1)};

  std::vector<QueuePair> queues(n), observed(n);
  std::vector<std::int64_t> carry_hc(n, 0), carry_lc(n, 0);
  std::vector<std::vector<std::int64_t>> hist_hc(n), hist_lc(n);
  trace.costs = CostCounters(n);
  std::int64_t s2_slots = 0, s3_slots = 0;

  for (std::int64_t t = 0; t < config.n_slots; ++t) {
    blockage.advance(t);
    const LinkFlags beta = blockage.beta();
    const LinkFlags beta_hat = blockage.beta_hat();
    const ChannelSlot ch = realize_channel(topo, beta, beta_hat, config.rician_k, fading);
    const GainMatrix gain = ch.power();
    const GainMatrix gain_hat = ch.power_hat();

    SlotRecord rec;
    rec.t = t;
    rec.del_hc.assign(n, 0);
    rec.del_lc.assign(n, 0);
    rec.costs.multi_connectivity.assign(n, false);

    auto take = [&](std::size_t i, std::int64_t hc, std::int64_t lc) {
      const std::int64_t r_hc = serve(queues[i].q_hc, hc);
      const std::int64_t r_lc = serve(queues[i].q_lc, lc);
      queues[i].cum_departures_hc += r_hc;
      queues[i].cum_departures_lc += r_lc;
      rec.del_hc[i] += r_hc;
      rec.del_lc[i] += r_lc;
    };

    if (tdma) {
      // The merged queue lives in q_hc.
      const auto out = decode_tdma(topo, gain, gain_hat, p_max, config.bandwidth_hz, config.slot_s,
                                   config.packet_bits);
      for (std::size_t i = 0; i < n; ++i) take(i, out.delivered[i], 0);
    } else {
      const TickActions actions = controller.tick(observed, beta_hat);
      if (actions.reoptimize) {
        rec.costs.optimizer_run = true;
        ++trace.optimizer_runs;
        const auto key = flatten(*actions.reoptimize);
        auto it = stage3_cache.find(key);
        if (it == stage3_cache.end()) {
          auto r = solve_stage3(config, topo, *actions.reoptimize);
          if (!r.report.stable)
            trace.warnings.push_back("slot " + std::to_string(t) +
                                     ": stage-3 allocation not mean-rate stable");
          it = stage3_cache.emplace(key, std::move(r.allocation)).first;
        }
        controller.schedule(it->second);
      }
      const StageState& st = controller.state();
      const PowerAllocation& p = st.active_allocation;

      DecodingOutcome out(n);
      if (st.central_decoding) {
        const auto order = central_order(ch.h_hat);
        const auto rates = coding_rates_central(ch.h_hat, p, order, cu_noise, config.bandwidth_hz);
        out = decode_central(ch.h, rates, p, order, cu_noise, config.bandwidth_hz, config.slot_s,
                             config.packet_bits);
      } else {
        PerAp<std::vector<std::size_t>> order = topo.order;
        if (config.decoding_order == OrderMode::kPerSlot)
          for (std::size_t j = 0; j < kNumAps; ++j) order[j] = descending_order(gain_hat[j]);
        const PerAp<bool> coop = ctrl_config.allows_stage2() ? st.stage2_active : PerAp<bool>{false, false};
        const SeparateReceiver rx =
            (coop[0] || coop[1])
                ? stage2_receiver(topo, std::move(order), config.bandwidth_hz, config.nq, p_max, coop)
                : stage1_receiver(topo, std::move(order), config.bandwidth_hz);
        const auto rates = coding_rates_separate(rx, gain_hat, beta_hat, p);
        out = decode_separate(rx, gain, beta_hat, rates, p, config.slot_s, config.packet_bits);
        rec.costs.multi_connectivity = out.multi_connectivity;
      }

      for (std::size_t i = 0; i < n; ++i) take(i, carry_hc[i], carry_lc[i]);
      for (std::size_t i = 0; i < n; ++i) {
        take(i, out.offset_hc[i] == 0 ? out.delivered_hc[i] : 0,
             out.offset_lc[i] == 0 ? out.delivered_lc[i] : 0);
        carry_hc[i] = out.offset_hc[i] == 1 ? out.delivered_hc[i] : 0;
        carry_lc[i] = out.offset_lc[i] == 1 ? out.delivered_lc[i] : 0;
      }
      rec.stage = st.stage();
      rec.central_decoding = st.central_decoding;
      rec.costs.forwarding = forwarding_aps(st);
    }

    observed = queues;
    rec.q_hc.resize(n);
    rec.q_lc.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (tdma) std::tie(rec.q_hc[i], rec.q_lc[i]) = split_merged(queues[i].q_hc, config.hc_fraction);
      else std::tie(rec.q_hc[i], rec.q_lc[i]) = std::pair{queues[i].q_hc, queues[i].q_lc};
    }

    if (t >= config.warmup_slots) {
      for (std::size_t i = 0; i < n; ++i) {
        hist_hc[i].push_back(rec.q_hc[i]);
        hist_lc[i].push_back(rec.q_lc[i]);
      }
      trace.costs.update(rec.costs);
      s2_slots += rec.stage == 2;
      s3_slots += rec.stage == 3;
    }

    for (std::size_t i = 0; i < n; ++i) {
      auto a = sample_arrivals(config.hc_fraction, config.arrival_bps, config.slot_s,
                               config.packet_bits, arrival_rngs[i]);
      if (tdma) {
        a.a_hc += a.a_lc;
        a.a_lc = 0;
      }
      queues[i] = step_queue(queues[i], 0, 0, a);
    }

    if (options.keep_slots) {
      rec.beta = beta;
      rec.beta_hat = beta_hat;
      trace.slots.push_back(std::move(rec));
    }
  }

  trace.final_queues = queues;
  const double recorded = static_cast<double>(config.n_slots - config.warmup_slots);
  trace.stage2_fraction = static_cast<double>(s2_slots) / recorded;
  trace.stage3_fraction = static_cast<double>(s3_slots) / recorded;
  for (std::size_t i = 0; i < n; ++i) {
    UeMetrics m;
    const auto d = delay_metrics(hist_hc[i], hist_lc[i], config.hc_fraction, config.arrival_bps,
                                 config.slot_s, config.packet_bits);
    m.tau_hc = d.tau_hc;
    m.tau_lc = d.tau_lc;
    m.exceed_hc = exceedance(hist_hc[i], config.q_max_hc);
    m.exceed_lc = exceedance(hist_lc[i], config.q_max_lc);
    trace.metrics.push_back(m);
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Sweeps

MeanStderr mean_stderr(const std::vector<double>& samples) {
  MeanStderr out;
  if (samples.empty()) return {std::nan(""), std::nan("")};
  double sum = 0;
  for (double x : samples) sum += x;
  out.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0;
    for (double x : samples) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / static_cast<double>(samples.size() - 1) /
                            static_cast<double>(samples.size()));
  }
  return out;
}

namespace {

struct RunMetrics {
  std::optional<double> tau_hc, tau_lc;
  double exceed_hc = 0, exceed_lc = 0, rho_mc = 0, rho_coop = 0, rho_opt = 0, s2 = 0, s3 = 0;
};

RunMetrics worst_user(const EpisodeTrace& tr) {
  RunMetrics r;
  auto worst = [](std::optional<double>& acc, const std::optional<double>& v) {
    if (v) acc = acc ? std::max(*acc, *v) : *v;
  };
  for (const auto& m : tr.metrics) {
    worst(r.tau_hc, m.tau_hc);
    worst(r.tau_lc, m.tau_lc);
    r.exceed_hc = std::max(r.exceed_hc, m.exceed_hc);
    r.exceed_lc = std::max(r.exceed_lc, m.exceed_lc);
  }
  r.rho_mc = tr.costs.rho_mc();
  r.rho_coop = tr.costs.rho_coop_sum();
  r.rho_opt = tr.costs.rho_opt();
  r.s2 = tr.stage2_fraction;
  r.s3 = tr.stage3_fraction;
  return r;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const ScenarioConfig& base, const SweepSpec& spec) {
  if (spec.n_runs < 1) throw ConfigError("a sweep needs at least one run");
  std::vector<SweepPoint> points;
  std::vector<ScenarioConfig> configs;
  for (double d : spec.durations_ms) {
    for (StagePolicy policy : spec.policies) {
      ScenarioConfig c = base;
      const auto rates = rates_for_target(spec.blockage_probability, d / 1000.0);
      c.kappa_b = rates.kappa_b;
      c.mu_b = rates.mu_b;
      c.stage_policy = policy;
      c.blockage_schedule.reset();
      validate(c);
      configs.push_back(c);
      points.push_back({d, policy, spec.n_runs, {}, {}, {}, {}, {}, {}, {}, {}, {}});
    }
  }

  const std::size_t n_tasks = points.size() * spec.n_runs;
  std::vector<RunMetrics> results(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      const std::size_t point = task / spec.n_runs, run = task % spec.n_runs;
      const auto tr = run_episode(configs[point], episode_seed(base.seed, run), {false});
      results[task] = worst_user(tr);
    }
  };
  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_tasks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<double> hc, lc, ehc, elc, mc, coop, opt, s2, s3;
    for (std::size_t r = 0; r < spec.n_runs; ++r) {
      const auto& m = results[p * spec.n_runs + r];
      if (m.tau_hc) hc.push_back(*m.tau_hc);
      if (m.tau_lc) lc.push_back(*m.tau_lc);
      ehc.push_back(m.exceed_hc);
      elc.push_back(m.exceed_lc);
      mc.push_back(m.rho_mc);
      coop.push_back(m.rho_coop);
      opt.push_back(m.rho_opt);
      s2.push_back(m.s2);
      s3.push_back(m.s3);
    }
    auto& pt = points[p];
    pt.tau_hc_worst = mean_stderr(hc);
    pt.tau_lc_worst = mean_stderr(lc);
    pt.exceed_hc = mean_stderr(ehc);
    pt.exceed_lc = mean_stderr(elc);
    pt.rho_mc = mean_stderr(mc);
    pt.rho_coop_sum = mean_stderr(coop);
    pt.rho_opt = mean_stderr(opt);
    pt.stage2_fraction = mean_stderr(s2);
    pt.stage3_fraction = mean_stderr(s3);
  }
  return points;
}

// ---------------------------------------------------------------------------
// CSV output

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

void write_timeseries_csv(std::ostream& out, const EpisodeTrace& trace) {
  const std::size_t n = trace.topology.n_users();
  out << "t,ue,q_hc,q_lc,stage";
  for (const char* prefix : {"beta_", "betahat_"})
    for (std::size_t j = 0; j < kNumAps; ++j)
      for (std::size_t i = 0; i < n; ++i) out << ',' << prefix << j + 1 << '_' << i + 1;
  out << ",del_hc,del_lc,mc,coop_1,coop_2,opt\n";
  for (const auto& s : trace.slots) {
    std::string links;
    for (const LinkFlags* f : {&s.beta, &s.beta_hat})
      for (std::size_t j = 0; j < kNumAps; ++j)
        for (std::size_t i = 0; i < n; ++i) links += (*f)[j][i] ? ",1" : ",0";
    for (std::size_t i = 0; i < n; ++i) {
      out << s.t << ',' << i + 1 << ',' << s.q_hc[i] << ',' << s.q_lc[i] << ',' << s.stage << links
          << ',' << s.del_hc[i] << ',' << s.del_lc[i] << ',' << int(s.costs.multi_connectivity[i])
          << ',' << int(s.costs.forwarding[0]) << ',' << int(s.costs.forwarding[1]) << ','
          << int(s.costs.optimizer_run) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << "duration_ms,policy,tau_hc_worst,tau_lc_worst,exceed_hc,exceed_lc,rho_mc,rho_coop_sum,"
         "rho_opt,stage2_frac,stage3_frac,n_runs,tau_hc_worst_se,tau_lc_worst_se,exceed_hc_se,"
         "exceed_lc_se,rho_mc_se,rho_coop_sum_se,rho_opt_se,stage2_frac_se,stage3_frac_se\n";
  for (const auto& p : points) {
    const MeanStderr* cols[] = {&p.tau_hc_worst, &p.tau_lc_worst, &p.exceed_hc,
                                &p.exceed_lc,    &p.rho_mc,       &p.rho_coop_sum,
                                &p.rho_opt,      &p.stage2_fraction, &p.stage3_fraction};
    out << num(p.duration_ms) << ',' << to_string(p.policy);
    for (const auto* c : cols) out << ',' << num(c->mean);
    out << ',' << p.n_runs;
    for (const auto* c : cols) out << ',' << num(c->stderr_);
    out << '\n';
  }
}

}  // namespace mcrsim
