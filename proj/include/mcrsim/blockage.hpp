#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mcrsim/rng.hpp"
#include "mcrsim/scenario.hpp"

namespace mcrsim {

/// LoS state of one UE-AP link. A fresh blockage is only detected one slot
/// later, so in the slot where beta drops from 1 to 0 the detected state
/// still reads 1.
struct LinkState {
  bool beta = true;
  bool beta_prev = true;
  bool beta_hat = true;

  bool fresh_blockage() const { return beta_prev && !beta; }
};

/// Advances one link by one slot of the alternating renewal process.
LinkState step_blockage(const LinkState& state, double kappa_b, double mu_b, double slot_s,
                        Engine& rng);

/// Applies the detection rule to an already-sampled transition.
LinkState observe(bool beta_prev, bool beta);

/// kappa / (kappa + mu).
double steady_state_prob(double kappa_b, double mu_b);

struct BlockageRates {
  double kappa_b = 0.0;
  double mu_b = 0.0;
};

/// Rates with mean blockage duration `mean_duration_s` and long-run blocked
/// fraction `p_b`.
BlockageRates rates_for_target(double p_b, double mean_duration_s);

/// Merges overlapping or touching intervals per link.
std::vector<BlockageInterval> merge_schedule(std::vector<BlockageInterval> schedule);

/// Blockage state of every link of an episode, either sampled (one RNG
/// substream per link) or replayed from a schedule.
class BlockageProcess {
 public:
  BlockageProcess(const ScenarioConfig& config, std::uint64_t episode_seed);

  /// Moves all links to slot `t`.
  void advance(std::int64_t t);

  const LinkState& link(std::size_t ap, std::size_t ue) const {
    return states_[ap * n_users_ + ue];
  }
  LinkFlags beta() const;
  LinkFlags beta_hat() const;

 private:
  bool scripted_blocked(std::size_t ap, std::size_t ue, std::int64_t t) const;

  std::size_t n_users_;
  double kappa_b_, mu_b_, slot_s_;
  bool scripted_ = false;
  std::vector<BlockageInterval> schedule_;
  std::vector<Engine> engines_;
  std::vector<LinkState> states_;
};

}  // namespace mcrsim
