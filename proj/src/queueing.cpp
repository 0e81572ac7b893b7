#include "mcrsim/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mcrsim {

ArrivalSample sample_arrivals(double hc_fraction, double arrival_bps, double slot_s,
                              double packet_bits, Engine& rng) {
  const double mean = arrival_bps * slot_s / packet_bits;
  ArrivalSample a;
  const double hc_mean = hc_fraction * mean;
  const double lc_mean = (1.0 - hc_fraction) * mean;
  if (hc_mean > 0) a.a_hc = std::poisson_distribution<std::int64_t>(hc_mean)(rng);
  if (lc_mean > 0) a.a_lc = std::poisson_distribution<std::int64_t>(lc_mean)(rng);
  return a;
}

std::int64_t serve(std::int64_t& queue, std::int64_t delivered) {
  const std::int64_t removed = std::clamp<std::int64_t>(delivered, 0, queue);
  queue -= removed;
  return removed;
}

QueuePair step_queue(QueuePair q, std::int64_t delivered_hc, std::int64_t delivered_lc,
                     const ArrivalSample& arrivals) {
  q.cum_departures_hc += serve(q.q_hc, delivered_hc);
  q.cum_departures_lc += serve(q.q_lc, delivered_lc);
  q.q_hc += arrivals.a_hc;
  q.q_lc += arrivals.a_lc;
  q.cum_arrivals_hc += arrivals.a_hc;
  q.cum_arrivals_lc += arrivals.a_lc;
  return q;
}

std::int64_t packets_per_slot(double rate_bps, double slot_s, double packet_bits) {
  if (!(rate_bps > 0)) return 0;
  return static_cast<std::int64_t>(std::floor(rate_bps * slot_s / packet_bits));
}

std::optional<double> littles_law_delay(std::span<const std::int64_t> backlog,
                                        double arrivals_per_slot) {
  if (backlog.empty()) throw std::invalid_argument("delay metric needs a nonempty history");
  if (!(arrivals_per_slot > 0)) return std::nullopt;
  const double sum = std::accumulate(backlog.begin(), backlog.end(), 0.0);
  return sum / static_cast<double>(backlog.size()) / arrivals_per_slot;
}

DelayMetrics delay_metrics(std::span<const std::int64_t> backlog_hc,
                           std::span<const std::int64_t> backlog_lc, double hc_fraction,
                           double arrival_bps, double slot_s, double packet_bits) {
  const double per_slot = arrival_bps * slot_s / packet_bits;
  return {littles_law_delay(backlog_hc, hc_fraction * per_slot),
          littles_law_delay(backlog_lc, (1.0 - hc_fraction) * per_slot)};
}

double exceedance(std::span<const std::int64_t> backlog, double threshold) {
  if (backlog.empty()) return 0.0;
  const auto over = std::count_if(backlog.begin(), backlog.end(),
                                  [&](std::int64_t q) { return static_cast<double>(q) > threshold; });
  return static_cast<double>(over) / static_cast<double>(backlog.size());
}

}  // namespace mcrsim
