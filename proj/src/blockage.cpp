#include "mcrsim/blockage.hpp"

#include <algorithm>
#include <cmath>

namespace mcrsim {

LinkState observe(bool beta_prev, bool beta) {
  LinkState s;
  s.beta_prev = beta_prev;
  s.beta = beta;
  s.beta_hat = (beta_prev && !beta) ? true : beta;
  return s;
}

LinkState step_blockage(const LinkState& state, double kappa_b, double mu_b, double slot_s,
                        Engine& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng);
  bool beta = state.beta;
  if (state.beta) {
    if (draw < -std::expm1(-kappa_b * slot_s)) beta = false;
  } else {
    if (draw < -std::expm1(-mu_b * slot_s)) beta = true;
  }
  return observe(state.beta, beta);
}

double steady_state_prob(double kappa_b, double mu_b) {
  if (kappa_b < 0 || mu_b < 0 || kappa_b + mu_b <= 0)
    throw DomainError("steady_state_prob: rates must be nonnegative and not both zero");
  return kappa_b / (kappa_b + mu_b);
}

BlockageRates rates_for_target(double p_b, double mean_duration_s) {
  if (!(p_b > 0.0 && p_b < 1.0))
    throw DomainError("rates_for_target: p_b must lie in (0, 1)");
  if (!(mean_duration_s > 0.0))
    throw DomainError("rates_for_target: mean duration must be positive");
  const double mu = 1.0 / mean_duration_s;
  return {mu * p_b / (1.0 - p_b), mu};
}

std::vector<BlockageInterval> merge_schedule(std::vector<BlockageInterval> s) {
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) {
    if (a.ap != b.ap) return a.ap < b.ap;
    if (a.ue != b.ue) return a.ue < b.ue;
    return a.start < b.start;
  });
  std::vector<BlockageInterval> out;
  for (const auto& b : s) {
    if (!out.empty() && out.back().ap == b.ap && out.back().ue == b.ue &&
        b.start <= out.back().end + 1) {
      out.back().end = std::max(out.back().end, b.end);
    } else {
      out.push_back(b);
    }
  }
  return out;
}

BlockageProcess::BlockageProcess(const ScenarioConfig& config, std::uint64_t episode_seed)
    : n_users_(config.n_users),
      kappa_b_(config.kappa_b),
      mu_b_(config.mu_b),
      slot_s_(config.slot_s),
      states_(kNumAps * config.n_users) {
  if (config.blockage_schedule) {
    scripted_ = true;
    schedule_ = merge_schedule(*config.blockage_schedule);
    for (std::size_t j = 0; j < kNumAps; ++j)
      for (std::size_t i = 0; i < n_users_; ++i) {
        const bool b = !scripted_blocked(j, i, -1);
        states_[j * n_users_ + i] = observe(b, b);
      }
    return;
  }
  // Start in steady state so short runs carry no warm-up bias.
  const double p_b = kappa_b_ > 0 ? steady_state_prob(kappa_b_, mu_b_) : 0.0;
  engines_.reserve(states_.size());
  for (std::size_t l = 0; l < states_.size(); ++l) {
    engines_.push_back(make_engine(episode_seed, Stream::kBlockage, l));
    std::bernoulli_distribution los(1.0 - p_b);
    const bool b = los(engines_.back());
    states_[l] = observe(b, b);
  }
}

bool BlockageProcess::scripted_blocked(std::size_t ap, std::size_t ue, std::int64_t t) const {
  return std::any_of(schedule_.begin(), schedule_.end(), [&](const BlockageInterval& b) {
    return b.ap == ap && b.ue == ue && t >= b.start && t <= b.end;
  });
}

void BlockageProcess::advance(std::int64_t t) {
  for (std::size_t j = 0; j < kNumAps; ++j)
    for (std::size_t i = 0; i < n_users_; ++i) {
      auto& s = states_[j * n_users_ + i];
      if (scripted_)
        s = observe(s.beta, !scripted_blocked(j, i, t));
      else
        s = step_blockage(s, kappa_b_, mu_b_, slot_s_, engines_[j * n_users_ + i]);
    }
}

LinkFlags BlockageProcess::beta() const {
  LinkFlags f;
  for (std::size_t j = 0; j < kNumAps; ++j) {
    f[j].resize(n_users_);
    for (std::size_t i = 0; i < n_users_; ++i) f[j][i] = link(j, i).beta;
  }
  return f;
}

LinkFlags BlockageProcess::beta_hat() const {
  LinkFlags f;
  for (std::size_t j = 0; j < kNumAps; ++j) {
    f[j].resize(n_users_);
    for (std::size_t i = 0; i < n_users_; ++i) f[j][i] = link(j, i).beta_hat;
  }
  return f;
}

}  // namespace mcrsim
