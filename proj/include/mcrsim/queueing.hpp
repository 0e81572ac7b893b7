#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mcrsim/rng.hpp"

namespace mcrsim {

struct ArrivalSample {
  std::int64_t a_hc = 0;
  std::int64_t a_lc = 0;
};

/// HC and LC buffers of one UE, in packets.
struct QueuePair {
  std::int64_t q_hc = 0;
  std::int64_t q_lc = 0;
  std::int64_t cum_arrivals_hc = 0;
  std::int64_t cum_arrivals_lc = 0;
  std::int64_t cum_departures_hc = 0;
  std::int64_t cum_departures_lc = 0;
};

/// Poisson arrivals with means alpha*a*T/M and (1-alpha)*a*T/M packets.
ArrivalSample sample_arrivals(double hc_fraction, double arrival_bps, double slot_s,
                              double packet_bits, Engine& rng);

/// Departures are clamped to the backlog; returns the number actually removed.
std::int64_t serve(std::int64_t& queue, std::int64_t delivered);

/// q <- max(q - L, 0) + A for both classes.
QueuePair step_queue(QueuePair queue, std::int64_t delivered_hc, std::int64_t delivered_lc,
                     const ArrivalSample& arrivals);

/// Packets that fit in one slot at `rate_bps`, floored.
std::int64_t packets_per_slot(double rate_bps, double slot_s, double packet_bits);

/// Little's-law delay in slots: mean backlog over mean arrivals per slot.
/// Absent when the class receives no traffic.
std::optional<double> littles_law_delay(std::span<const std::int64_t> backlog,
                                        double arrivals_per_slot);

struct DelayMetrics {
  std::optional<double> tau_hc;
  std::optional<double> tau_lc;
};

DelayMetrics delay_metrics(std::span<const std::int64_t> backlog_hc,
                           std::span<const std::int64_t> backlog_lc, double hc_fraction,
                           double arrival_bps, double slot_s, double packet_bits);

/// Fraction of slots whose backlog is strictly above `threshold`.
double exceedance(std::span<const std::int64_t> backlog, double threshold);

}  // namespace mcrsim
