#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcrsim {

// The system model is restricted to two access points.
inline constexpr std::size_t kNumAps = 2;

template <class T>
using PerAp = std::array<T, kNumAps>;

/// Linear power gains indexed [ap][ue].
using GainMatrix = PerAp<std::vector<double>>;

/// Complex channel coefficients indexed [ap][ue].
using ChannelMatrix = PerAp<std::vector<std::complex<double>>>;

/// Binary per-link flags indexed [ap][ue].
using LinkFlags = PerAp<std::vector<bool>>;

inline constexpr std::size_t other_ap(std::size_t ap) { return 1 - ap; }

enum class Criticality { kHigh, kLow };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

/// Raised for arguments outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a configuration fails validation or cannot be parsed.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double dbm_to_watts(double dbm);

}  // namespace mcrsim
