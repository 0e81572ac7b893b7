#include "mcrsim/phy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mcrsim/queueing.hpp"

namespace mcrsim {

PowerAllocation PowerAllocation::equal_split(std::size_t n_users, double p_max) {
  return {std::vector<double>(n_users, p_max / 2), std::vector<double>(n_users, p_max / 2)};
}

DecodingOutcome::DecodingOutcome(std::size_t n)
    : eta_hc{std::vector<bool>(n, false), std::vector<bool>(n, false)},
      eta_lc(n, false),
      hc_delivered(n, false),
      offset_hc(n, 0),
      offset_lc(n, 0),
      delivered_hc(n, 0),
      delivered_lc(n, 0),
      multi_connectivity(n, false) {}

double sic_sinr(std::span<const double> gain, const PowerAllocation& p, const SicState& state,
                std::size_t ue, Criticality cls, double noise) {
  const double signal = gain[ue] * p.power(ue, cls);
  if (signal <= 0) return 0.0;
  double interference = 0.0;
  const std::size_t n = gain.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (!state.hc[k] && !(cls == Criticality::kHigh && k == ue))
      interference += gain[k] * p.p_hc[k];
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!state.lc[k] && !(cls == Criticality::kLow && k == ue))
      interference += gain[k] * p.p_lc[k];
  }
  return signal / (interference + noise);
}

double shannon_rate(double bandwidth_hz, double sinr) {
  return bandwidth_hz * std::log2(1.0 + sinr);
}

bool rate_supports(double achievable_bps, double coding_bps) {
  return achievable_bps >= coding_bps * (1.0 - 1e-9);
}

double sinr_hc_separate(std::span<const double> gain, const PowerAllocation& p,
                        std::span<const std::size_t> order, const std::vector<bool>& eta_hc,
                        std::size_t ue, double noise) {
  SicState s(gain.size());
  for (std::size_t k : order) {
    if (k == ue) break;
    s.hc[k] = eta_hc[k];
  }
  return sic_sinr(gain, p, s, ue, Criticality::kHigh, noise);
}

double sinr_lc_separate(std::span<const double> gain, const PowerAllocation& p,
                        std::span<const std::size_t> order, const std::vector<bool>& associated,
                        const std::vector<bool>& eta_hc, const std::vector<bool>& eta_lc,
                        std::size_t ue, double noise) {
  SicState s(gain.size());
  s.hc = eta_hc;
  for (std::size_t k : order) {
    if (k == ue) break;
    if (associated[k]) s.lc[k] = eta_lc[k];
  }
  return sic_sinr(gain, p, s, ue, Criticality::kLow, noise);
}

double quantization_noise(const Topology& topology, int nq, double p_max_w, std::size_t ap) {
  double sigma_y = topology.noise_power[ap];
  for (double g : topology.pathloss_gain[ap]) sigma_y += p_max_w * g;
  return std::ldexp(sigma_y, -nq);
}

double forwarded_noise(const Topology& topology, int nq, double p_max_w, std::size_t ap) {
  return topology.noise_power[ap] + quantization_noise(topology, nq, p_max_w, ap);
}

SeparateReceiver stage1_receiver(const Topology& topology, PerAp<std::vector<std::size_t>> order,
                                 double bandwidth_hz) {
  SeparateReceiver rx;
  rx.topology = &topology;
  rx.order = std::move(order);
  rx.noise = topology.noise_power;
  rx.forwarded_noise = topology.noise_power;
  rx.bandwidth_hz = bandwidth_hz;
  return rx;
}

SeparateReceiver stage2_receiver(const Topology& topology, PerAp<std::vector<std::size_t>> order,
                                 double bandwidth_hz, int nq, double p_max_w,
                                 PerAp<bool> cooperative) {
  SeparateReceiver rx = stage1_receiver(topology, std::move(order), bandwidth_hz);
  rx.cooperative = cooperative;
  for (std::size_t j = 0; j < kNumAps; ++j)
    rx.forwarded_noise[j] = forwarded_noise(topology, nq, p_max_w, j);
  return rx;
}

std::vector<std::size_t> hc_decoding_aps(const SeparateReceiver& rx, const LinkFlags& beta_hat,
                                         std::size_t ue) {
  std::vector<std::size_t> aps;
  for (std::size_t a = 0; a < kNumAps; ++a) {
    const bool own = beta_hat[a][ue];
    const bool via_partner = rx.cooperative[a] && beta_hat[other_ap(a)][ue];
    if (own || via_partner) aps.push_back(a);
  }
  if (aps.empty()) aps.push_back(rx.topology->assoc[ue]);
  return aps;
}

double combined_sinr(const SeparateReceiver& rx, const GainMatrix& gain, const PowerAllocation& p,
                     const SicState& state, std::size_t ap, std::size_t ue, Criticality cls) {
  double sinr = sic_sinr(gain[ap], p, state, ue, cls, rx.noise[ap]);
  if (rx.cooperative[ap]) {
    const std::size_t partner = other_ap(ap);
    sinr += sic_sinr(gain[partner], p, state, ue, cls, rx.forwarded_noise[partner]);
  }
  return sinr;
}

namespace {

// attempts[a][ue]: AP a is expected to decode the HC message of ue.
PerAp<std::vector<bool>> hc_attempts(const SeparateReceiver& rx, const LinkFlags& beta_hat) {
  const std::size_t n = rx.topology->n_users();
  PerAp<std::vector<bool>> attempts{std::vector<bool>(n, false), std::vector<bool>(n, false)};
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t a : hc_decoding_aps(rx, beta_hat, m)) attempts[a][m] = true;
  return attempts;
}

}  // namespace

CodingRates coding_rates_separate(const SeparateReceiver& rx, const GainMatrix& gain_hat,
                                  const LinkFlags& beta_hat, const PowerAllocation& p) {
  const Topology& topo = *rx.topology;
  const std::size_t n = topo.n_users();
  const auto attempts = hc_attempts(rx, beta_hat);

  PerAp<std::vector<double>> expected_hc{std::vector<double>(n, 0.0),
                                         std::vector<double>(n, 0.0)};
  CodingRates rates{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

  for (std::size_t a = 0; a < kNumAps; ++a) {
    // HC: every earlier message in the order counts as cancelled.
    SicState chain(n);
    for (std::size_t m : rx.order[a]) {
      if (attempts[a][m])
        expected_hc[a][m] = combined_sinr(rx, gain_hat, p, chain, a, m, Criticality::kHigh);
      chain.cancel(m, Criticality::kHigh);
    }
    // LC: HC messages this AP will not decode stay as noise.
    SicState s(n);
    s.hc = attempts[a];
    for (std::size_t i : rx.order[a]) {
      if (topo.assoc[i] != a) continue;
      const double sinr = combined_sinr(rx, gain_hat, p, s, a, i, Criticality::kLow);
      rates.r_lc[i] = shannon_rate(rx.bandwidth_hz, sinr);
      s.cancel(i, Criticality::kLow);
    }
  }
  for (std::size_t m = 0; m < n; ++m) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t a : hc_decoding_aps(rx, beta_hat, m)) worst = std::min(worst, expected_hc[a][m]);
    rates.r_hc[m] = shannon_rate(rx.bandwidth_hz, worst);
  }
  return rates;
}

DecodingOutcome decode_separate(const SeparateReceiver& rx, const GainMatrix& gain,
                                const LinkFlags& beta_hat, const CodingRates& rates,
                                const PowerAllocation& p, double slot_s, double packet_bits) {
  const Topology& topo = *rx.topology;
  const std::size_t n = topo.n_users();
  const auto attempts = hc_attempts(rx, beta_hat);
  DecodingOutcome out(n);

  for (std::size_t a = 0; a < kNumAps; ++a) {
    SicState s(n);
    for (std::size_t m : rx.order[a]) {
      if (!attempts[a][m]) continue;
      bool ok = true;
      if (rates.r_hc[m] > 0) {
        const double sinr = combined_sinr(rx, gain, p, s, a, m, Criticality::kHigh);
        ok = rate_supports(shannon_rate(rx.bandwidth_hz, sinr), rates.r_hc[m]);
      }
      out.eta_hc[a][m] = ok;
      if (ok) s.cancel(m, Criticality::kHigh);
    }
    for (std::size_t i : rx.order[a]) {
      if (topo.assoc[i] != a) continue;
      bool ok = true;
      if (rates.r_lc[i] > 0) {
        const double sinr = combined_sinr(rx, gain, p, s, a, i, Criticality::kLow);
        ok = rate_supports(shannon_rate(rx.bandwidth_hz, sinr), rates.r_lc[i]);
      }
      out.eta_lc[i] = ok;
      if (ok) s.cancel(i, Criticality::kLow);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t serving = topo.assoc[i];
    int offset = 2;
    for (std::size_t a = 0; a < kNumAps; ++a)
      if (out.eta_hc[a][i]) offset = std::min(offset, rx.cooperative[a] ? 1 : 0);
    out.hc_delivered[i] = offset < 2;
    out.offset_hc[i] = out.hc_delivered[i] ? offset : 0;
    out.offset_lc[i] = rx.cooperative[serving] ? 1 : 0;
    out.delivered_hc[i] =
        out.hc_delivered[i] ? packets_per_slot(rates.r_hc[i], slot_s, packet_bits) : 0;
    out.delivered_lc[i] = out.eta_lc[i] ? packets_per_slot(rates.r_lc[i], slot_s, packet_bits) : 0;
    out.multi_connectivity[i] = out.hc_delivered[i] && !out.eta_hc[serving][i] &&
                                !rx.cooperative[serving] && out.delivered_hc[i] > 0;
  }
  return out;
}

double central_rate(const ChannelMatrix& h, const PowerAllocation& p, const SicState& state,
                    std::size_t ue, Criticality cls, const PerAp<double>& noise,
                    double bandwidth_hz) {
  using Mat = Eigen::Matrix2cd;
  using Vec = Eigen::Vector2cd;
  auto column = [&](std::size_t k) { return Vec(h[0][k], h[1][k]); };
  const double power = p.power(ue, cls);
  if (power <= 0) return 0.0;

  Mat q = Mat::Zero();
  q(0, 0) = noise[0];
  q(1, 1) = noise[1];
  const std::size_t n = p.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (!state.hc[k] && !(cls == Criticality::kHigh && k == ue)) {
      const Vec v = column(k);
      q += p.p_hc[k] * v * v.adjoint();
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!state.lc[k] && !(cls == Criticality::kLow && k == ue)) {
      const Vec v = column(k);
      q += p.p_lc[k] * v * v.adjoint();
    }
  }
  const Vec hi = column(ue);
  const Mat gamma = power * hi * hi.adjoint() * q.inverse();
  const double det = (Mat::Identity() + gamma).determinant().real();
  return bandwidth_hz * std::log2(std::max(det, 1.0));
}

std::vector<std::size_t> central_order(const GainMatrix& gain) {
  std::vector<double> norm(gain[0].size());
  for (std::size_t i = 0; i < norm.size(); ++i) norm[i] = gain[0][i] + gain[1][i];
  return descending_order(norm);
}

std::vector<std::size_t> central_order(const ChannelMatrix& h) {
  GainMatrix g;
  for (std::size_t j = 0; j < kNumAps; ++j) {
    g[j].resize(h[j].size());
    for (std::size_t i = 0; i < h[j].size(); ++i) g[j][i] = std::norm(h[j][i]);
  }
  return central_order(g);
}

CodingRates coding_rates_central(const ChannelMatrix& h_hat, const PowerAllocation& p,
                                 std::span<const std::size_t> order,
                                 const PerAp<double>& noise, double bandwidth_hz) {
  const std::size_t n = p.size();
  CodingRates rates{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  SicState s(n);
  for (std::size_t m : order) {
    rates.r_hc[m] = central_rate(h_hat, p, s, m, Criticality::kHigh, noise, bandwidth_hz);
    s.cancel(m, Criticality::kHigh);
  }
  for (std::size_t m : order) {
    rates.r_lc[m] = central_rate(h_hat, p, s, m, Criticality::kLow, noise, bandwidth_hz);
    s.cancel(m, Criticality::kLow);
  }
  return rates;
}

DecodingOutcome decode_central(const ChannelMatrix& h, const CodingRates& rates,
                               const PowerAllocation& p, std::span<const std::size_t> order,
                               const PerAp<double>& noise, double bandwidth_hz, double slot_s,
                               double packet_bits) {
  const std::size_t n = p.size();
  DecodingOutcome out(n);
  SicState s(n);
  for (std::size_t m : order) {
    bool ok = true;
    if (rates.r_hc[m] > 0)
      ok = rate_supports(central_rate(h, p, s, m, Criticality::kHigh, noise, bandwidth_hz),
                         rates.r_hc[m]);
    out.eta_hc[0][m] = out.eta_hc[1][m] = out.hc_delivered[m] = ok;
    if (ok) s.cancel(m, Criticality::kHigh);
  }
  for (std::size_t m : order) {
    bool ok = true;
    if (rates.r_lc[m] > 0)
      ok = rate_supports(central_rate(h, p, s, m, Criticality::kLow, noise, bandwidth_hz),
                         rates.r_lc[m]);
    out.eta_lc[m] = ok;
    if (ok) s.cancel(m, Criticality::kLow);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.offset_hc[i] = out.offset_lc[i] = 1;
    out.delivered_hc[i] = out.hc_delivered[i] ? packets_per_slot(rates.r_hc[i], slot_s, packet_bits) : 0;
    out.delivered_lc[i] = out.eta_lc[i] ? packets_per_slot(rates.r_lc[i], slot_s, packet_bits) : 0;
  }
  return out;
}

double tdma_rate(double gain, double p_max_w, double noise, double bandwidth_hz,
                 std::size_t n_users) {
  return bandwidth_hz / static_cast<double>(n_users) * std::log2(1.0 + gain * p_max_w / noise);
}

TdmaOutcome decode_tdma(const Topology& topology, const GainMatrix& gain,
                        const GainMatrix& gain_hat, double p_max_w, double bandwidth_hz,
                        double slot_s, double packet_bits) {
  const std::size_t n = topology.n_users();
  TdmaOutcome out{std::vector<double>(n), std::vector<bool>(n), std::vector<std::int64_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = topology.assoc[i];
    const double noise = topology.noise_power[a];
    out.coding_rate[i] = tdma_rate(gain_hat[a][i], p_max_w, noise, bandwidth_hz, n);
    const double achievable = tdma_rate(gain[a][i], p_max_w, noise, bandwidth_hz, n);
    out.eta[i] = rate_supports(achievable, out.coding_rate[i]);
    out.delivered[i] = out.eta[i] ? packets_per_slot(out.coding_rate[i], slot_s, packet_bits) : 0;
  }
  return out;
}

}  // namespace mcrsim
