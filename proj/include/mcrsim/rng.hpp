#pragma once

#include <cstdint>
#include <random>

namespace mcrsim {

using Engine = std::mt19937_64;

/// Identifies an independent random substream within one episode.
enum class Stream : std::uint64_t {
  kPlacement = 1,
  kBlockage = 2,
  kFading = 3,
  kArrivals = 4,
  kEpisode = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based seed derivation: the result depends only on the inputs, so
/// substreams are reproducible regardless of creation or iteration order.
std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                          std::uint64_t index = 0);

Engine make_engine(std::uint64_t master, Stream stream, std::uint64_t index = 0);

}  // namespace mcrsim
