#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcrsim/scenario.hpp"
#include "mcrsim/types.hpp"

namespace mcrsim {

/// Per-UE superposition powers in Watts.
struct PowerAllocation {
  std::vector<double> p_hc;
  std::vector<double> p_lc;

  static PowerAllocation equal_split(std::size_t n_users, double p_max);
  std::size_t size() const { return p_hc.size(); }
  double power(std::size_t ue, Criticality c) const {
    return c == Criticality::kHigh ? p_hc[ue] : p_lc[ue];
  }
};

/// Coding rates in bit/s, fixed at transmit time from the expected channel.
struct CodingRates {
  std::vector<double> r_hc;
  std::vector<double> r_lc;
};

/// Messages already removed from a received signal by SIC.
struct SicState {
  std::vector<bool> hc;
  std::vector<bool> lc;

  explicit SicState(std::size_t n_users = 0) : hc(n_users, false), lc(n_users, false) {}
  bool cancelled(std::size_t ue, Criticality c) const {
    return c == Criticality::kHigh ? hc[ue] : lc[ue];
  }
  void cancel(std::size_t ue, Criticality c) {
    (c == Criticality::kHigh ? hc : lc)[ue] = true;
  }
};

/// Received SINR of one message on one branch: everything not yet cancelled
/// except the message itself counts as interference.
double sic_sinr(std::span<const double> gain, const PowerAllocation& p, const SicState& state,
                std::size_t ue, Criticality cls, double noise);

double shannon_rate(double bandwidth_hz, double sinr);

/// Separate SIC decoding at one AP with explicit success indicators of the
/// messages decoded so far. `eta_hc[k]` counts only for UEs decoded before
/// `ue` in `order`; LC entries only for associated UEs decoded earlier.
double sinr_hc_separate(std::span<const double> gain, const PowerAllocation& p,
                        std::span<const std::size_t> order, const std::vector<bool>& eta_hc,
                        std::size_t ue, double noise);
double sinr_lc_separate(std::span<const double> gain, const PowerAllocation& p,
                        std::span<const std::size_t> order, const std::vector<bool>& associated,
                        const std::vector<bool>& eta_hc, const std::vector<bool>& eta_lc,
                        std::size_t ue, double noise);

/// sigma_y^2 = sum_i P_max PL_ji + sigma_j^2, sigma_q^2 = 2^-Nq sigma_y^2.
double quantization_noise(const Topology& topology, int nq, double p_max_w, std::size_t ap);
/// sigma_j^2 + sigma_q^2 of the forwarded signal of `ap`.
double forwarded_noise(const Topology& topology, int nq, double p_max_w, std::size_t ap);

/// Slot-level receiver configuration for separate (per-AP) decoding.
struct SeparateReceiver {
  const Topology* topology = nullptr;
  PerAp<std::vector<std::size_t>> order;  // decode order per AP
  PerAp<bool> cooperative{false, false};  // AP combines the other AP's forwarded signal
  PerAp<double> noise{};                  // own-branch noise
  PerAp<double> forwarded_noise{};        // noise of an AP's signal after forwarding
  double bandwidth_hz = 0;
};

/// Which APs are expected to decode the HC message of `ue`, given detected
/// LoS states and cooperation. Never empty: falls back to the serving AP.
std::vector<std::size_t> hc_decoding_aps(const SeparateReceiver& rx, const LinkFlags& beta_hat,
                                         std::size_t ue);

/// Expected or realized SINR of a message at `ap`, summing the forwarded
/// branch when the AP cooperates.
double combined_sinr(const SeparateReceiver& rx, const GainMatrix& gain, const PowerAllocation& p,
                     const SicState& state, std::size_t ap, std::size_t ue, Criticality cls);

struct DecodingOutcome {
  PerAp<std::vector<bool>> eta_hc;  // per-AP HC success
  std::vector<bool> eta_lc;
  std::vector<bool> hc_delivered;   // success at any AP
  std::vector<int> offset_hc;       // 0: credited this slot, 1: next slot
  std::vector<int> offset_lc;
  std::vector<std::int64_t> delivered_hc;  // packets, before clamping to backlog
  std::vector<std::int64_t> delivered_lc;
  std::vector<bool> multi_connectivity;    // HC only recovered at the non-serving AP

  explicit DecodingOutcome(std::size_t n_users = 0);
};

/// Rates from expected gains |h_hat|^2: HC over the expected-decoding APs
/// (the min rule), LC at the serving AP with undecodable HC treated as noise.
CodingRates coding_rates_separate(const SeparateReceiver& rx, const GainMatrix& gain_hat,
                                  const LinkFlags& beta_hat, const PowerAllocation& p);

/// SIC at each AP in its order: HC of the expected-decoding set, then LC of
/// associated UEs. A failed message stays as interference.
DecodingOutcome decode_separate(const SeparateReceiver& rx, const GainMatrix& gain,
                                const LinkFlags& beta_hat, const CodingRates& rates,
                                const PowerAllocation& p, double slot_s, double packet_bits);

/// Plain MC-RSMA receiver with no cooperation.
SeparateReceiver stage1_receiver(const Topology& topology, PerAp<std::vector<std::size_t>> order,
                                 double bandwidth_hz);

/// Receiver where the APs flagged in `cooperative` combine the other AP's
/// quantized signal.
SeparateReceiver stage2_receiver(const Topology& topology, PerAp<std::vector<std::size_t>> order,
                                 double bandwidth_hz, int nq, double p_max_w,
                                 PerAp<bool> cooperative);

/// Rate of a rank-1 message at the CU: B log2 det(I + p h h^H Q^-1), where Q
/// holds the uncancelled interference and diag(noise).
double central_rate(const ChannelMatrix& h, const PowerAllocation& p, const SicState& state,
                    std::size_t ue, Criticality cls, const PerAp<double>& noise,
                    double bandwidth_hz);

/// Decode order at the CU by descending channel norm.
std::vector<std::size_t> central_order(const ChannelMatrix& h);
std::vector<std::size_t> central_order(const GainMatrix& gain);

CodingRates coding_rates_central(const ChannelMatrix& h_hat, const PowerAllocation& p,
                                 std::span<const std::size_t> order,
                                 const PerAp<double>& noise, double bandwidth_hz);

DecodingOutcome decode_central(const ChannelMatrix& h, const CodingRates& rates,
                               const PowerAllocation& p, std::span<const std::size_t> order,
                               const PerAp<double>& noise, double bandwidth_hz, double slot_s,
                               double packet_bits);

/// Equal time shares, full power, single stream to the serving AP.
double tdma_rate(double gain, double p_max_w, double noise, double bandwidth_hz,
                 std::size_t n_users);

struct TdmaOutcome {
  std::vector<double> coding_rate;
  std::vector<bool> eta;
  std::vector<std::int64_t> delivered;
};

TdmaOutcome decode_tdma(const Topology& topology, const GainMatrix& gain,
                        const GainMatrix& gain_hat, double p_max_w, double bandwidth_hz,
                        double slot_s, double packet_bits);

/// Decoding succeeds when the achievable rate reaches the coding rate. A
/// relative slack of 1e-9 absorbs floating-point noise between equal paths.
bool rate_supports(double achievable_bps, double coding_bps);

}  // namespace mcrsim
