#include "mcrsim/channel.hpp"

#include <cmath>

namespace mcrsim {

namespace {

GainMatrix squared_magnitude(const ChannelMatrix& h) {
  GainMatrix g;
  for (std::size_t j = 0; j < kNumAps; ++j) {
    g[j].resize(h[j].size());
    for (std::size_t i = 0; i < h[j].size(); ++i) g[j][i] = std::norm(h[j][i]);
  }
  return g;
}

}  // namespace

GainMatrix ChannelSlot::power() const { return squared_magnitude(h); }
GainMatrix ChannelSlot::power_hat() const { return squared_magnitude(h_hat); }

std::complex<double> rician_coefficient(double pathloss_gain, bool los, double k_factor,
                                        std::complex<double> nlos) {
  const double los_amp = los ? std::sqrt(k_factor / (k_factor + 1.0)) : 0.0;
  const double nlos_amp = std::sqrt(1.0 / (k_factor + 1.0));
  return std::sqrt(pathloss_gain) * (los_amp + nlos_amp * nlos);
}

std::vector<Engine> make_fading_engines(std::uint64_t episode_seed, std::size_t n_users) {
  std::vector<Engine> out;
  out.reserve(kNumAps * n_users);
  for (std::size_t l = 0; l < kNumAps * n_users; ++l)
    out.push_back(make_engine(episode_seed, Stream::kFading, l));
  return out;
}

ChannelSlot realize_channel(const Topology& topology, const LinkFlags& beta,
                            const LinkFlags& beta_hat, double k_factor,
                            std::vector<Engine>& link_rngs) {
  const std::size_t n = topology.n_users();
  // Each real component has variance 1/2 so that E|nlos|^2 = 1.
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  ChannelSlot slot;
  slot.avg_gain = topology.pathloss_gain;
  for (std::size_t j = 0; j < kNumAps; ++j) {
    slot.h[j].resize(n);
    slot.h_hat[j].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& rng = link_rngs[j * n + i];
      const double re = gauss(rng);
      const double im = gauss(rng);
      const std::complex<double> nlos(re, im);
      const double pl = topology.pathloss_gain[j][i];
      slot.h[j][i] = rician_coefficient(pl, beta[j][i], k_factor, nlos);
      slot.h_hat[j][i] = rician_coefficient(pl, beta_hat[j][i], k_factor, nlos);
    }
  }
  return slot;
}

GainMatrix average_gains(const Topology& topology) { return topology.pathloss_gain; }

GainMatrix average_gains(const Topology& topology, const LinkFlags& beta_hat,
                         double k_factor) {
  GainMatrix g = topology.pathloss_gain;
  for (std::size_t j = 0; j < kNumAps; ++j)
    for (std::size_t i = 0; i < g[j].size(); ++i)
      if (!beta_hat[j][i]) g[j][i] /= (k_factor + 1.0);
  return g;
}

}  // namespace mcrsim
