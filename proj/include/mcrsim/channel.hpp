#pragma once

#include <vector>

#include "mcrsim/rng.hpp"
#include "mcrsim/scenario.hpp"

namespace mcrsim {

/// Channel coefficients of one slot (block fading).
struct ChannelSlot {
  ChannelMatrix h;      // realized, true LoS state
  ChannelMatrix h_hat;  // same NLoS draw, detected LoS state
  GainMatrix avg_gain;  // path-loss gain, the E|h|^2 surrogate

  GainMatrix power() const;      // |h|^2
  GainMatrix power_hat() const;  // |h_hat|^2
};

/// sqrt(PL) * (beta * sqrt(K/(K+1)) + sqrt(1/(K+1)) * nlos)
std::complex<double> rician_coefficient(double pathloss_gain, bool los, double k_factor,
                                        std::complex<double> nlos);

/// Draws one CN(0,1) NLoS sample per link and builds both the realized and
/// the expected channel from it.
ChannelSlot realize_channel(const Topology& topology, const LinkFlags& beta,
                            const LinkFlags& beta_hat, double k_factor,
                            std::vector<Engine>& link_rngs);

/// One engine per link, ordered ap-major.
std::vector<Engine> make_fading_engines(std::uint64_t episode_seed, std::size_t n_users);

GainMatrix average_gains(const Topology& topology);

/// Average gains with detected-blocked links reduced to their NLoS power.
GainMatrix average_gains(const Topology& topology, const LinkFlags& beta_hat,
                         double k_factor);

}  // namespace mcrsim
