// Brute-force reference for the separate-decoding power allocation with two
// users. Shares no code with the library: geometry, gains, SINRs and success
// probabilities are re-derived here from first principles.
//
// Writes a JSON list of scenarios (UE positions and the best min-delta found)
// that the optimizer acceptance check compares against.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

constexpr double kArea = 150.0;
constexpr double kMinDist = 50.0;
constexpr double kPmax = 0.01;          // 10 dBm
constexpr double kBandwidth = 4e6;
constexpr double kNoise = 1.5924286822139944e-14;  // -174 dBm/Hz over 4 MHz, in W (checked below)
constexpr double kSlot = 0.01, kRate = 10e6, kAlpha = 0.5;
constexpr double kPb = 0.05, kMeanBlock = 0.3;
constexpr int kGrid = 200;   // values per power variable on the coarse pass
constexpr int kZoom = 41;    // values per variable on each refinement pass
constexpr int kZoomPasses = 4;

struct Scenario {
  std::array<std::array<double, 2>, 2> pos;  // [ue] -> (x, y)
  double g[2][2];                            // [ap][ue]
  int assoc[2];
  int first[2];                              // UE decoded first at each AP
  double w_hc[2], w_lc[2];                   // required bit/s per unit delta
};

double gain_at(double d_m) {
  const double pl_db = 128.1 + 37.6 * std::log10(d_m / 1000.0);
  return std::pow(10.0, -pl_db / 10.0);
}

Scenario build(const std::array<std::array<double, 2>, 2>& pos) {
  const double ap[2][2] = {{0, 0}, {150, 150}};
  Scenario s{};
  s.pos = pos;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      s.g[j][i] = gain_at(std::hypot(pos[i][0] - ap[j][0], pos[i][1] - ap[j][1]));
  for (int i = 0; i < 2; ++i) s.assoc[i] = s.g[1][i] > s.g[0][i] ? 1 : 0;
  for (int j = 0; j < 2; ++j) s.first[j] = s.g[j][1] > s.g[j][0] ? 1 : 0;

  // Success probabilities: own link unblocked, no earlier message hit by a
  // fresh blockage; HC counts if either AP succeeds.
  const double mu = 1.0 / kMeanBlock, kappa = mu * kPb / (1.0 - kPb);
  const double hit = (1.0 - kPb) * (1.0 - std::exp(-kappa * kSlot));
  auto p_at = [&](int rank) { return (1.0 - kPb) * std::pow(1.0 - hit, rank - 1); };
  const double arrivals = kRate;  // bits/s per UE
  for (int i = 0; i < 2; ++i) {
    const double pa = p_at(s.first[0] == i ? 1 : 2), pb = p_at(s.first[1] == i ? 1 : 2);
    const double p_hc = pa + (1 - pa) * pb;
    const double p_lc = p_at(2);
    s.w_hc[i] = kAlpha * arrivals / p_hc;
    s.w_lc[i] = (1 - kAlpha) * arrivals / p_lc;
  }
  return s;
}

// SINR thresholds equivalent to delta >= t for each message.
struct Thresholds {
  double hc[2], lc[2];
};

Thresholds thresholds(const Scenario& s, double t) {
  Thresholds th;
  for (int i = 0; i < 2; ++i) {
    th.hc[i] = std::exp2(t * s.w_hc[i] / kBandwidth) - 1.0;
    th.lc[i] = std::exp2(t * s.w_lc[i] / kBandwidth) - 1.0;
  }
  return th;
}

// min delta over the four messages; p = {ph0, pl0, ph1, pl1}.
double min_delta(const Scenario& s, const double* p) {
  const double ph[2] = {p[0], p[2]}, pl[2] = {p[1], p[3]};
  double best = INFINITY;
  for (int i = 0; i < 2; ++i) {
    double hc = INFINITY;
    for (int j = 0; j < 2; ++j) {
      const int k = 1 - i;
      double den = s.g[j][0] * pl[0] + s.g[j][1] * pl[1] + kNoise;
      if (s.first[j] == i) den += s.g[j][k] * ph[k];  // the other HC is decoded later
      hc = std::min(hc, s.g[j][i] * ph[i] / den);
    }
    const int a = s.assoc[i], k = 1 - i;
    double den = kNoise;
    // The other UE's LC interferes unless it is associated with a and decoded earlier.
    if (s.assoc[k] != a || s.first[a] == i) den += s.g[a][k] * pl[k];
    const double lc = s.g[a][i] * pl[i] / den;
    best = std::min({best, kBandwidth * std::log2(1 + hc) / s.w_hc[i],
                     kBandwidth * std::log2(1 + lc) / s.w_lc[i]});
  }
  return best;
}

// Exhaustive search of the product grid with SINR-threshold pruning.
double search(const Scenario& s, const std::array<std::vector<double>, 4>& axes, double* best_p,
              double best) {
  Thresholds th = thresholds(s, best);
  double p[4];
  for (double ph0 : axes[0]) {
    for (double pl0 : axes[1]) {
      if (ph0 + pl0 > kPmax) continue;
      for (double ph1 : axes[2]) {
        for (double pl1 : axes[3]) {
          if (ph1 + pl1 > kPmax) continue;
          const double ph[2] = {ph0, ph1}, pl[2] = {pl0, pl1};
          bool beats = true;
          for (int i = 0; i < 2 && beats; ++i) {
            const int k = 1 - i, a = s.assoc[i];
            double den = kNoise;
            if (s.assoc[k] != a || s.first[a] == i) den += s.g[a][k] * pl[k];
            if (s.g[a][i] * pl[i] <= th.lc[i] * den) beats = false;
            for (int j = 0; j < 2 && beats; ++j) {
              double d = s.g[j][0] * pl[0] + s.g[j][1] * pl[1] + kNoise;
              if (s.first[j] == i) d += s.g[j][k] * ph[k];
              if (s.g[j][i] * ph[i] <= th.hc[i] * d) beats = false;
            }
          }
          if (!beats) continue;
          p[0] = ph0, p[1] = pl0, p[2] = ph1, p[3] = pl1;
          const double v = min_delta(s, p);
          if (v > best) {
            best = v;
            std::copy(p, p + 4, best_p);
            th = thresholds(s, best);
          }
        }
      }
    }
  }
  return best;
}

std::vector<double> log_axis(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo * std::pow(hi / lo, double(k) / (n - 1));
  return v;
}

std::vector<double> lin_axis(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path = argc > 1 ? argv[1] : "stage1_grid_oracle.json";
  const int n_scenarios = argc > 2 ? std::stoi(argv[2]) : 20;
  const double noise_check = std::pow(10.0, (-174.0 - 30.0) / 10.0) * kBandwidth;
  if (std::abs(noise_check / kNoise - 1.0) > 1e-12) {
    std::cerr << "noise constant mismatch: " << noise_check << '\n';
    return 1;
  }

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, kArea);
  nlohmann::json out = nlohmann::json::array();
  for (int n = 0; n < n_scenarios; ++n) {
    std::array<std::array<double, 2>, 2> pos;
    for (auto& q : pos) {
      do {
        q = {u(rng), u(rng)};
      } while (std::hypot(q[0], q[1]) < kMinDist || std::hypot(q[0] - 150, q[1] - 150) < kMinDist);
    }
    const Scenario s = build(pos);
    const auto t0 = std::chrono::steady_clock::now();

    std::array<std::vector<double>, 4> axes;
    for (auto& a : axes) a = log_axis(kPmax * 1e-5, kPmax, kGrid);
    double p[4] = {};
    double best = search(s, axes, p, 0.0);
    const double coarse = best;
    // Zoom: each pass searches +-2 coarse steps around the incumbent.
    double half[4];
    for (int v = 0; v < 4; ++v) half[v] = p[v] * (std::pow(1e5, 2.0 / (kGrid - 1)) - 1.0);
    for (int pass = 0; pass < kZoomPasses; ++pass) {
      for (int v = 0; v < 4; ++v) {
        const double lo = std::max(p[v] - half[v], kPmax * 1e-7);
        const double hi = std::min(p[v] + half[v], kPmax);
        axes[v] = lin_axis(lo, hi, kZoom);
        half[v] = (hi - lo) / (kZoom - 1) * 2.0;
      }
      best = search(s, axes, p, best);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "scenario " << n << ": coarse " << coarse << " refined " << best << " (" << secs
              << " s)\n";
    out.push_back({{"ue_positions", {{pos[0][0], pos[0][1]}, {pos[1][0], pos[1][1]}}},
                   {"coarse_min_delta", coarse},
                   {"min_delta", best},
                   {"powers", {p[0], p[1], p[2], p[3]}}});
  }
  std::ofstream f(out_path);
  f << out.dump(2) << '\n';
  return 0;
}
