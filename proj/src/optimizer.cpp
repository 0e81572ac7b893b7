#include "mcrsim/optimizer.hpp"

#include "mcrsim/channel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mcrsim {

// ---------------------------------------------------------------------------
// Success probabilities

double either_success(double p_a, double p_b) { return p_a + (1.0 - p_a) * p_b; }

SuccessProbs success_probs_stage1(double p_b, double kappa_b, double slot_s,
                                  const PerAp<std::vector<std::size_t>>& order,
                                  std::size_t n_users, SuccessModel model) {
  const double fresh = -std::expm1(-kappa_b * slot_s);  // 1 - e^{-kappa T}
  const double hit = (1.0 - p_b) * fresh;  // an unblocked link blocks during the slot
  auto prob = [&](std::size_t earlier) {
    const double e = static_cast<double>(earlier);
    if (model == SuccessModel::kVerbatim) return (1.0 - p_b) * (1.0 - std::pow(hit, e));
    return (1.0 - p_b) * std::pow(1.0 - hit, e);
  };
  SuccessProbs out;
  out.p_lc.assign(n_users, prob(n_users - 1));
  for (std::size_t j = 0; j < kNumAps; ++j) {
    out.p_hc[j].assign(n_users, 0.0);
    for (std::size_t pos = 0; pos < order[j].size(); ++pos) out.p_hc[j][order[j][pos]] = prob(pos);
  }
  out.p_hc_combined.resize(n_users);
  for (std::size_t i = 0; i < n_users; ++i)
    out.p_hc_combined[i] = either_success(out.p_hc[0][i], out.p_hc[1][i]);
  return out;
}

double success_prob_stage3(double kappa_b, double mu_b, double slot_s, std::size_t n_unblocked,
                           std::size_t n_total_links, SuccessModel model) {
  const double n = static_cast<double>(n_unblocked);
  if (model == SuccessModel::kVerbatim) {
    return std::pow(-std::expm1(-kappa_b * slot_s), n) *
           std::pow(-std::expm1(-mu_b * slot_s), 1.0 - n);
  }
  const double blocked = static_cast<double>(n_total_links - n_unblocked);
  return std::exp(-kappa_b * slot_s * n - mu_b * slot_s * blocked);
}

// ---------------------------------------------------------------------------
// Problem evaluation

double StabilityTargets::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double d : delta_hc) m = std::min(m, d);
  for (double d : delta_lc) m = std::min(m, d);
  return m;
}

namespace {

std::vector<double> flatten(const PowerAllocation& p) {
  std::vector<double> v(2 * p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[2 * i] = p.p_hc[i];
    v[2 * i + 1] = p.p_lc[i];
  }
  return v;
}

double branch_sinr(const SinrBranch& b, std::size_t var, const std::vector<double>& p) {
  double den = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) den += b.interference[v] * p[v];
  return b.signal_gain * p[var] / (den + b.noise);
}

}  // namespace

double constraint_rate(const RateConstraint& c, const PowerAllocation& p, double bandwidth_hz) {
  const auto flat = flatten(p);
  double sinr = 0.0;
  for (const auto& b : c.branches) sinr += branch_sinr(b, c.var(), flat);
  return shannon_rate(bandwidth_hz, sinr);
}

StabilityTargets evaluate_targets(const MaxMinProblem& problem, const PowerAllocation& p) {
  const double inf = std::numeric_limits<double>::infinity();
  StabilityTargets t{std::vector<double>(problem.n_users, inf),
                     std::vector<double>(problem.n_users, inf)};
  for (const auto& c : problem.constraints) {
    const double rate = constraint_rate(c, p, problem.bandwidth_hz);
    const double delta = std::isinf(c.required_bps) ? 0.0 : rate / c.required_bps;
    auto& slot = (c.cls == Criticality::kHigh ? t.delta_hc : t.delta_lc)[c.ue];
    slot = std::min(slot, delta);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Convexified subproblem and its barrier solver

namespace {

// Branch rescaled to unit noise with powers normalized by p_max.
struct ScaledBranch {
  double gain = 0;  // signal gain * p_max / noise
  std::vector<std::pair<std::size_t, double>> interference;
};

struct ScaledConstraint {
  std::size_t var = 0;
  double slope = 0;  // ln 2 * required / bandwidth, so the SINR target is exp(slope*t) - 1
  std::vector<ScaledBranch> branches;
};

std::vector<ScaledConstraint> scale(const MaxMinProblem& problem) {
  std::vector<ScaledConstraint> out;
  for (const auto& c : problem.constraints) {
    if (c.required_bps <= 0) continue;
    ScaledConstraint s;
    s.var = c.var();
    s.slope = std::numbers::ln2 * c.required_bps / problem.bandwidth_hz;
    for (const auto& b : c.branches) {
      ScaledBranch sb;
      sb.gain = b.signal_gain * problem.p_max_w / b.noise;
      for (std::size_t v = 0; v < b.interference.size(); ++v)
        if (b.interference[v] > 0) sb.interference.emplace_back(v, b.interference[v] * problem.p_max_w / b.noise);
      s.branches.push_back(std::move(sb));
    }
    out.push_back(std::move(s));
  }
  return out;
}

double denominator(const ScaledBranch& b, const Eigen::VectorXd& x) {
  double den = 1.0;
  for (const auto& [v, a] : b.interference) den += a * x[v];
  return den;
}

using Transform = std::vector<std::vector<double>>;  // y per constraint per branch

Transform fixed_point(const std::vector<ScaledConstraint>& cons, const Eigen::VectorXd& x) {
  Transform y(cons.size());
  for (std::size_t k = 0; k < cons.size(); ++k)
    for (const auto& b : cons[k].branches)
      y[k].push_back(std::sqrt(b.gain * x[cons[k].var]) / denominator(b, x));
  return y;
}

// Lower bound on sum_b SINR_b.
double surrogate(const ScaledConstraint& c, const std::vector<double>& y, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (std::size_t b = 0; b < c.branches.size(); ++b) {
    const auto& br = c.branches[b];
    s += 2.0 * y[b] * std::sqrt(br.gain * x[c.var]) - y[b] * y[b] * denominator(br, x);
  }
  return s;
}

// Largest t with exp(slope t) - 1 <= s for every constraint.
double level_for(const std::vector<ScaledConstraint>& cons, const std::vector<double>& s) {
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cons.size(); ++k)
    t = std::min(t, std::log1p(std::max(s[k], 0.0)) / cons[k].slope);
  return t;
}

class BarrierSolver {
 public:
  BarrierSolver(const std::vector<ScaledConstraint>& cons, std::size_t n_users, const Transform& y)
      : cons_(cons), n_users_(n_users), y_(y), n_(2 * n_users + 1) {}

  // All constraint values at z, or false if z is outside the strict interior.
  bool values(const Eigen::VectorXd& z, std::vector<double>& f) const {
    f.clear();
    const double t = z[n_ - 1];
    for (std::size_t k = 0; k < cons_.size(); ++k) {
      const double v = surrogate(cons_[k], y_[k], z) - std::expm1(cons_[k].slope * t);
      if (!(v > 0)) return false;
      f.push_back(v);
    }
    for (std::size_t i = 0; i < n_users_; ++i) {
      const double v = 1.0 - z[2 * i] - z[2 * i + 1];
      if (!(v > 0)) return false;
      f.push_back(v);
    }
    for (std::size_t v = 0; v + 1 < n_; ++v) {
      if (!(z[v] > 0)) return false;
      f.push_back(z[v]);
    }
    return true;
  }

  std::size_t n_constraints() const { return cons_.size() + n_users_ + (n_ - 1); }

  // Maximizes mu*t + sum log f starting from a strictly feasible z.
  void center(Eigen::VectorXd& z, double mu) const {
    std::vector<double> f, f_new;
    Eigen::VectorXd grad(n_), d(n_), gk(n_);
    Eigen::MatrixXd hess(n_, n_);
    for (int iter = 0; iter < 100; ++iter) {
      values(z, f);
      grad.setZero();
      hess.setZero();
      grad[n_ - 1] = mu;
      const double t = z[n_ - 1];
      for (std::size_t k = 0; k < cons_.size(); ++k) {
        const auto& c = cons_[k];
        gk.setZero();
        double h_vv = 0.0;
        const double xv = z[c.var];
        for (std::size_t b = 0; b < c.branches.size(); ++b) {
          const auto& br = c.branches[b];
          const double yb = y_[k][b];
          const double root = yb * std::sqrt(br.gain);
          gk[c.var] += root / std::sqrt(xv);
          h_vv -= 0.5 * root / (xv * std::sqrt(xv));
          for (const auto& [v, a] : br.interference) gk[v] -= yb * yb * a;
        }
        const double e = std::exp(c.slope * t);
        gk[n_ - 1] = -c.slope * e;
        const double h_tt = -c.slope * c.slope * e;
        const double inv = 1.0 / f[k];
        grad += inv * gk;
        hess.noalias() -= (inv * inv) * gk * gk.transpose();
        hess(c.var, c.var) += inv * h_vv;
        hess(n_ - 1, n_ - 1) += inv * h_tt;
      }
      for (std::size_t i = 0; i < n_users_; ++i) {
        const double inv = 1.0 / f[cons_.size() + i];
        const std::size_t a = 2 * i, b = 2 * i + 1;
        grad[a] -= inv;
        grad[b] -= inv;
        const double w = inv * inv;
        hess(a, a) -= w;
        hess(b, b) -= w;
        hess(a, b) -= w;
        hess(b, a) -= w;
      }
      for (std::size_t v = 0; v + 1 < n_; ++v) {
        const double inv = 1.0 / z[v];
        grad[v] += inv;
        hess(v, v) -= inv * inv;
      }

      Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
      d = ldlt.solve(grad);
      if (ldlt.info() != Eigen::Success || !d.allFinite()) d = grad;
      const double decrement = grad.dot(d);
      if (!(decrement > 2e-12)) return;

      double step = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        const Eigen::VectorXd trial = z + step * d;
        if (!values(trial, f_new)) continue;
        double gain = mu * step * d[n_ - 1];
        for (std::size_t q = 0; q < f.size(); ++q) gain += std::log(f_new[q] / f[q]);
        if (gain >= 0.25 * step * decrement) {
          z = trial;
          moved = true;
          break;
        }
      }
      if (!moved) return;
    }
  }

  // Returns the subproblem optimum t*; z holds the maximizer.
  double solve(Eigen::VectorXd& z, double gap) const {
    const double m = static_cast<double>(n_constraints());
    double mu = 1.0;
    for (int stage = 0; stage < 40; ++stage) {
      center(z, mu);
      if (m / mu <= gap * std::max(1.0, std::abs(z[n_ - 1]))) break;
      mu *= 20.0;
    }
    return z[n_ - 1];
  }

 private:
  const std::vector<ScaledConstraint>& cons_;
  std::size_t n_users_;
  const Transform& y_;
  std::size_t n_;
};

}  // namespace

OptimizationResult solve_max_min(const MaxMinProblem& problem, const SolverOptions& options) {
  const std::size_t n_users = problem.n_users;
  OptimizationResult result;
  result.allocation = PowerAllocation::equal_split(n_users, problem.p_max_w);

  const bool unreachable = std::any_of(problem.constraints.begin(), problem.constraints.end(),
                                       [](const RateConstraint& c) { return std::isinf(c.required_bps); });
  const auto cons = scale(problem);
  if (unreachable || cons.empty()) {
    result.targets = evaluate_targets(problem, result.allocation);
    result.report.degenerate = unreachable;
    result.report.converged = true;
    result.report.stable = result.targets.min() > 1.0;
    result.report.message = unreachable ? "a required rate has zero success probability"
                                        : "no traffic to serve";
    return result;
  }

  const std::size_t n = 2 * n_users + 1;
  Eigen::VectorXd z = Eigen::VectorXd::Constant(n, 0.5);
  Transform y = fixed_point(cons, z);

  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    // The last optimum sits on the boundary; restart from the strict interior
    // so the first centering step is well conditioned.
    z.head(n - 1) *= 1.0 - 1e-3;
    {
      std::vector<double> s;
      for (std::size_t k = 0; k < cons.size(); ++k) s.push_back(surrogate(cons[k], y[k], z));
      const double level = level_for(cons, s);
      z[n - 1] = level - std::max(1e-3, 1e-3 * std::abs(level));
    }
    BarrierSolver solver(cons, n_users, y);
    const double inner = solver.solve(z, options.barrier_gap);
    result.report.iterations = it + 1;

    PowerAllocation p;
    p.p_hc.resize(n_users);
    p.p_lc.resize(n_users);
    for (std::size_t i = 0; i < n_users; ++i) {
      p.p_hc[i] = z[2 * i] * problem.p_max_w;
      p.p_lc[i] = z[2 * i + 1] * problem.p_max_w;
    }
    const auto targets = evaluate_targets(problem, p);
    result.report.trace.push_back({inner, targets.min()});
    result.report.y = y;
    result.allocation = std::move(p);
    result.targets = targets;

    // Stop once both the objective and the transform variables have settled.
    Transform y_next = fixed_point(cons, z);
    double y_shift = 0.0;
    for (std::size_t c = 0; c < y.size(); ++c)
      for (std::size_t b = 0; b < y[c].size(); ++b)
        y_shift = std::max(y_shift, std::abs(y_next[c][b] - y[c][b]) /
                                        std::max(std::abs(y[c][b]), 1e-300));
    if (std::abs(inner - previous) < options.tolerance * std::max(1.0, std::abs(inner)) &&
        y_shift < options.tolerance) {
      result.report.converged = true;
      break;
    }
    previous = inner;
    y = std::move(y_next);
  }
  result.report.stable = result.targets.min() > 1.0;
  if (!result.report.converged) result.report.message = "iteration limit reached";
  else if (!result.report.stable) result.report.message = "optimal min delta <= 1: queues not mean-rate stable";
  return result;
}

// ---------------------------------------------------------------------------
// Problem builders

TrafficModel traffic_of(const ScenarioConfig& config) {
  return {config.hc_arrivals_per_slot(), config.lc_arrivals_per_slot(), config.slot_s,
          config.packet_bits};
}

namespace {

double required_rate(double packets_per_slot, double success, const TrafficModel& traffic) {
  if (packets_per_slot <= 0) return 0.0;
  if (success <= 0) return std::numeric_limits<double>::infinity();
  return packets_per_slot * traffic.packet_bits / (traffic.slot_s * success);
}

std::size_t hc_var(std::size_t ue) { return 2 * ue; }
std::size_t lc_var(std::size_t ue) { return 2 * ue + 1; }

}  // namespace

MaxMinProblem stage1_problem(const Topology& topology, const GainMatrix& g,
                             const TrafficModel& traffic, const SuccessProbs& probs,
                             double bandwidth_hz, double p_max_w) {
  const std::size_t n = topology.n_users();
  MaxMinProblem problem{n, p_max_w, bandwidth_hz, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double need_hc = required_rate(traffic.hc_packets_per_slot, probs.p_hc_combined[i], traffic);
    if (need_hc != 0.0) {
      for (std::size_t a = 0; a < kNumAps; ++a) {
        SinrBranch b{g[a][i], std::vector<double>(2 * n, 0.0), topology.noise_power[a]};
        for (std::size_t k = 0; k < n; ++k) b.interference[lc_var(k)] = g[a][k];
        const auto& order = topology.order[a];
        auto pos = std::find(order.begin(), order.end(), i);
        for (auto it = pos + 1; it != order.end(); ++it) b.interference[hc_var(*it)] = g[a][*it];
        problem.constraints.push_back({i, Criticality::kHigh, need_hc, {std::move(b)}});
      }
    }
    const double need_lc = required_rate(traffic.lc_packets_per_slot, probs.p_lc[i], traffic);
    if (need_lc != 0.0) {
      const std::size_t a = topology.assoc[i];
      SinrBranch b{g[a][i], std::vector<double>(2 * n, 0.0), topology.noise_power[a]};
      const auto& order = topology.order[a];
      bool later = false;
      for (std::size_t k : order) {
        if (k == i) {
          later = true;
          continue;
        }
        if (topology.assoc[k] != a || later) b.interference[lc_var(k)] = g[a][k];
      }
      problem.constraints.push_back({i, Criticality::kLow, need_lc, {std::move(b)}});
    }
  }
  return problem;
}

MaxMinProblem stage3_problem(const GainMatrix& g, std::span<const std::size_t> order,
                             const PerAp<double>& noise, const TrafficModel& traffic,
                             double p_any, double bandwidth_hz, double p_max_w) {
  const std::size_t n = g[0].size();
  MaxMinProblem problem{n, p_max_w, bandwidth_hz, {}};
  const double need_hc = required_rate(traffic.hc_packets_per_slot, p_any, traffic);
  const double need_lc = required_rate(traffic.lc_packets_per_slot, p_any, traffic);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    if (need_hc != 0.0) {
      RateConstraint c{i, Criticality::kHigh, need_hc, {}};
      for (std::size_t a = 0; a < kNumAps; ++a) {
        SinrBranch b{g[a][i], std::vector<double>(2 * n, 0.0), noise[a]};
        for (std::size_t k = 0; k < n; ++k) b.interference[lc_var(k)] = g[a][k];
        for (std::size_t q = pos + 1; q < order.size(); ++q) b.interference[hc_var(order[q])] = g[a][order[q]];
        c.branches.push_back(std::move(b));
      }
      problem.constraints.push_back(std::move(c));
    }
    if (need_lc != 0.0) {
      RateConstraint c{i, Criticality::kLow, need_lc, {}};
      for (std::size_t a = 0; a < kNumAps; ++a) {
        SinrBranch b{g[a][i], std::vector<double>(2 * n, 0.0), noise[a]};
        for (std::size_t q = pos + 1; q < order.size(); ++q) b.interference[lc_var(order[q])] = g[a][order[q]];
        c.branches.push_back(std::move(b));
      }
      problem.constraints.push_back(std::move(c));
    }
  }
  return problem;
}

OptimizationResult solve_stage1(const ScenarioConfig& config, const Topology& topology,
                                const SolverOptions& options) {
  const double p_b = config.kappa_b > 0 ? config.blockage_probability() : 0.0;
  const auto probs = success_probs_stage1(p_b, config.kappa_b, config.slot_s, topology.order,
                                          topology.n_users(), config.success_model);
  const auto problem = stage1_problem(topology, average_gains(topology), traffic_of(config), probs,
                                      config.bandwidth_hz, config.p_max_w());
  return solve_max_min(problem, options);
}

OptimizationResult solve_stage3(const ScenarioConfig& config, const Topology& topology,
                                const LinkFlags& beta_hat, const SolverOptions& options) {
  GainMatrix g = topology.pathloss_gain;
  std::size_t unblocked = 0;
  for (std::size_t j = 0; j < kNumAps; ++j)
    for (std::size_t i = 0; i < g[j].size(); ++i) {
      if (beta_hat[j][i]) ++unblocked;
      else g[j][i] /= (config.rician_k + 1.0);
    }
  const PerAp<double> noise{forwarded_noise(topology, config.nq, config.p_max_w(), 0),
                            forwarded_noise(topology, config.nq, config.p_max_w(), 1)};
  const double p_any = success_prob_stage3(config.kappa_b, config.mu_b, config.slot_s, unblocked,
                                           config.n_links(), config.success_model);
  const auto order = central_order(g);
  const auto problem = stage3_problem(g, order, noise, traffic_of(config), p_any,
                                      config.bandwidth_hz, config.p_max_w());
  return solve_max_min(problem, options);
}

}  // namespace mcrsim
