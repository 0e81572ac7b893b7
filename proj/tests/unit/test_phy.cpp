#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"

#include "mcrsim/channel.hpp"
#include "mcrsim/phy.hpp"
#include "mcrsim/queueing.hpp"

using namespace mcrsim;

namespace {

constexpr double kB = 4e6;

LinkFlags all(std::size_t n, bool v) { return {std::vector<bool>(n, v), std::vector<bool>(n, v)}; }

double rate(double sinr) { return kB * std::log2(1.0 + sinr); }

// UE 0 close to AP 0, UE 1 in the middle but nearer AP 1.
struct Fixture {
  ScenarioConfig config;
  Topology topo;
  PowerAllocation p{{4e-3, 7e-3}, {5e-3, 2e-3}};
  double noise;
  Fixture() : topo(make_topology(config, {{40, 50}, {78, 78}})), noise(config.noise_power_w()) {}
};

}  // namespace

TEST_SUITE("phy") {
  TEST_CASE("single user SINRs") {
    const std::vector<double> g{3e-10};
    const PowerAllocation p{{6e-3}, {4e-3}};
    const double s2 = 1.6e-14;
    SicState s(1);
    CHECK(sic_sinr(g, p, s, 0, Criticality::kHigh, s2) ==
          doctest::Approx(3e-10 * 6e-3 / (3e-10 * 4e-3 + s2)));
    s.cancel(0, Criticality::kHigh);
    CHECK(sic_sinr(g, p, s, 0, Criticality::kLow, s2) == doctest::Approx(3e-10 * 4e-3 / s2));
  }

  TEST_CASE("two-user separate SINRs match a hand expansion") {
    const std::vector<double> g{2e-10, 7e-10};
    const PowerAllocation p{{5e-3, 3e-3}, {4e-3, 6e-3}};
    const double s2 = 1e-13;
    const std::vector<std::size_t> order{1, 0};
    // UE 1 first: everything else interferes.
    const double first = g[1] * 3e-3 / (g[0] * (5e-3 + 4e-3) + g[1] * 6e-3 + s2);
    CHECK(sinr_hc_separate(g, p, order, {false, false}, 1, s2) == doctest::Approx(first));
    // UE 0 second, UE 1's HC removed or not.
    const double ok = g[0] * 5e-3 / (g[0] * 4e-3 + g[1] * 6e-3 + s2);
    const double failed = g[0] * 5e-3 / (g[0] * 4e-3 + g[1] * (6e-3 + 3e-3) + s2);
    CHECK(sinr_hc_separate(g, p, order, {false, true}, 0, s2) == doctest::Approx(ok));
    CHECK(sinr_hc_separate(g, p, order, {false, false}, 0, s2) == doctest::Approx(failed));
    // LC of UE 0 after both HC and UE 1's LC (both associated).
    const double lc = g[0] * 4e-3 / s2;
    CHECK(sinr_lc_separate(g, p, order, {true, true}, {true, true}, {false, true}, 0, s2) ==
          doctest::Approx(lc));
    // UE 1 not associated here: its LC stays as interference.
    const double lc_int = g[0] * 4e-3 / (g[1] * 6e-3 + s2);
    CHECK(sinr_lc_separate(g, p, order, {true, false}, {true, true}, {false, true}, 0, s2) ==
          doctest::Approx(lc_int));
  }

  TEST_CASE("SINR never drops when an earlier message is decoded") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 4;
      std::vector<double> g(n);
      PowerAllocation p{std::vector<double>(n), std::vector<double>(n)};
      for (std::size_t k = 0; k < n; ++k) {
        g[k] = u(rng) * 1e-9;
        p.p_hc[k] = u(rng) * 5e-3;
        p.p_lc[k] = u(rng) * 5e-3;
      }
      const std::vector<std::size_t> order{2, 0, 3, 1};
      const std::vector<bool> assoc{true, false, true, true};
      std::vector<bool> eta_hc(n), eta_lc(n);
      for (std::size_t k = 0; k < n; ++k) {
        eta_hc[k] = u(rng) > 0.5;
        eta_lc[k] = u(rng) > 0.5;
      }
      for (std::size_t flip = 0; flip < n; ++flip) {
        auto up_hc = eta_hc, up_lc = eta_lc;
        up_hc[flip] = true;
        up_lc[flip] = true;
        for (std::size_t ue = 0; ue < n; ++ue) {
          CHECK(sinr_hc_separate(g, p, order, up_hc, ue, 1e-14) >=
                sinr_hc_separate(g, p, order, eta_hc, ue, 1e-14));
          CHECK(sinr_lc_separate(g, p, order, assoc, up_hc, up_lc, ue, 1e-14) >=
                sinr_lc_separate(g, p, order, assoc, eta_hc, eta_lc, ue, 1e-14));
        }
      }
    }
  }

  TEST_CASE("HC coding rate is the minimum over both APs") {
    Fixture f;
    const auto& topo = f.topo;
    const auto rx = stage1_receiver(topo, topo.order, kB);
    const auto g = average_gains(topo);
    const auto rates = coding_rates_separate(rx, g, all(2, true), f.p);
    for (std::size_t i = 0; i < 2; ++i) {
      double sinr[2];
      for (std::size_t j = 0; j < 2; ++j) {
        // Earlier-ordered HC is cancelled; everything else interferes.
        const std::size_t k = 1 - i;
        double den = g[j][0] * f.p.p_lc[0] + g[j][1] * f.p.p_lc[1] + f.noise;
        if (topo.order[j][0] == i) den += g[j][k] * f.p.p_hc[k];
        sinr[j] = g[j][i] * f.p.p_hc[i] / den;
      }
      CHECK(rates.r_hc[i] == doctest::Approx(rate(std::min(sinr[0], sinr[1]))).epsilon(1e-12));
    }
  }

  TEST_CASE("detected blockage restricts the HC rate to the other AP") {
    Fixture f;
    const auto& topo = f.topo;
    const auto rx = stage1_receiver(topo, topo.order, kB);
    const auto g = average_gains(topo);
    LinkFlags bh = all(2, true);
    bh[0][1] = false;  // UE 1 blocked at AP 0
    const auto rates = coding_rates_separate(rx, g, bh, f.p);
    CHECK(hc_decoding_aps(rx, bh, 1) == std::vector<std::size_t>{1});
    double den = g[1][0] * f.p.p_lc[0] + g[1][1] * f.p.p_lc[1] + f.noise;
    if (topo.order[1][0] == 1) den += g[1][0] * f.p.p_hc[0];
    CHECK(rates.r_hc[1] == doctest::Approx(rate(g[1][1] * f.p.p_hc[1] / den)).epsilon(1e-12));
  }

  TEST_CASE("LC treats an interferer's undecodable HC as noise") {
    Fixture f;
    const auto& topo = f.topo;
    REQUIRE(topo.assoc[0] == 0);
    REQUIRE(topo.assoc[1] == 1);
    const auto rx = stage1_receiver(topo, topo.order, kB);
    const auto g = average_gains(topo);
    LinkFlags bh = all(2, true);
    bh[0][1] = false;  // AP 0 will not decode UE 1's HC
    const auto rates = coding_rates_separate(rx, g, bh, f.p);
    // UE 0's LC at AP 0: UE 1's LC is not associated, so both of its messages interfere.
    const double sinr = g[0][0] * f.p.p_lc[0] / (g[0][1] * (f.p.p_hc[1] + f.p.p_lc[1]) + f.noise);
    CHECK(rates.r_lc[0] == doctest::Approx(rate(sinr)).epsilon(1e-12));
    const auto clear = coding_rates_separate(rx, g, all(2, true), f.p);
    const double sinr_clear = g[0][0] * f.p.p_lc[0] / (g[0][1] * f.p.p_lc[1] + f.noise);
    CHECK(clear.r_lc[0] == doctest::Approx(rate(sinr_clear)).epsilon(1e-12));
  }

  TEST_CASE("matching channels decode everything") {
    Fixture f;
    const auto rx = stage1_receiver(f.topo, f.topo.order, kB);
    const auto g = average_gains(f.topo);
    const auto rates = coding_rates_separate(rx, g, all(2, true), f.p);
    const auto out = decode_separate(rx, g, all(2, true), rates, f.p, 0.01, 1000);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(out.eta_hc[0][i]);
      CHECK(out.eta_hc[1][i]);
      CHECK(out.eta_lc[i]);
      CHECK(out.offset_hc[i] == 0);
      CHECK(out.delivered_hc[i] == packets_per_slot(rates.r_hc[i], 0.01, 1000));
      CHECK_FALSE(out.multi_connectivity[i]);
    }
  }

  TEST_CASE("undetected blockage on the serving link: HC survives via the other AP") {
    Fixture f;
    const auto rx = stage1_receiver(f.topo, f.topo.order, kB);
    const auto g_hat = average_gains(f.topo);
    auto g = g_hat;
    g[0][0] /= 1e4;  // UE 0 loses its serving link this slot
    const auto rates = coding_rates_separate(rx, g_hat, all(2, true), f.p);
    const auto out = decode_separate(rx, g, all(2, true), rates, f.p, 0.01, 1000);
    CHECK_FALSE(out.eta_hc[0][0]);
    CHECK(out.eta_hc[1][0]);
    CHECK(out.hc_delivered[0]);
    CHECK_FALSE(out.eta_lc[0]);
    CHECK(out.delivered_lc[0] == 0);
    CHECK(out.multi_connectivity[0]);
  }

  TEST_CASE("a silent stream decodes vacuously") {
    Fixture f;
    f.p.p_lc[1] = 0.0;
    const auto rx = stage1_receiver(f.topo, f.topo.order, kB);
    const auto g = average_gains(f.topo);
    const auto rates = coding_rates_separate(rx, g, all(2, true), f.p);
    CHECK(rates.r_lc[1] == 0.0);
    auto worse = g;
    for (auto& row : worse)
      for (auto& x : row) x *= 1e-3;
    const auto out = decode_separate(rx, worse, all(2, true), rates, f.p, 0.01, 1000);
    CHECK(out.eta_lc[1]);
    CHECK(out.delivered_lc[1] == 0);
  }

  TEST_CASE("quantization noise") {
    ScenarioConfig c;
    const double d = 1000.0 / std::sqrt(2.0);
    const auto topo = make_topology(c, {{d, d}});
    const double sigma_y = 0.01 * std::pow(10.0, -12.81) + c.noise_power_w();
    CHECK(quantization_noise(topo, 10, 0.01, 0) == doctest::Approx(sigma_y / 1024.0).epsilon(1e-9));
    CHECK(forwarded_noise(topo, 10, 0.01, 0) ==
          doctest::Approx(c.noise_power_w() + sigma_y / 1024.0).epsilon(1e-12));
    CHECK(forwarded_noise(topo, 200, 0.01, 0) == doctest::Approx(c.noise_power_w()).epsilon(1e-15));
  }

  TEST_CASE("ideal cooperation doubles the first SINR for symmetric channels") {
    ScenarioConfig c;
    const auto topo = make_topology(c, {{75, 75}});
    const PowerAllocation p{{6e-3}, {4e-3}};
    const auto rx1 = stage1_receiver(topo, topo.order, kB);
    const auto rx2 = stage2_receiver(topo, topo.order, kB, 200, 0.01, {true, false});
    const auto g = average_gains(topo);
    SicState s(1);
    const double single = combined_sinr(rx1, g, p, s, 0, 0, Criticality::kHigh);
    const double coop = combined_sinr(rx2, g, p, s, 0, 0, Criticality::kHigh);
    CHECK(coop == doctest::Approx(2.0 * single).epsilon(1e-12));
  }

  TEST_CASE("cooperation with infinite resolution is ideal MRC") {
    Fixture f;
    const auto rx = stage2_receiver(f.topo, f.topo.order, kB, 300, 0.01, {true, false});
    auto g = average_gains(f.topo);
    g[0][1] /= 21.0;
    SicState s(2);
    s.cancel(0, Criticality::kHigh);
    s.cancel(1, Criticality::kHigh);
    const double sinr0 = g[0][0] * f.p.p_lc[0] / (g[0][1] * f.p.p_lc[1] + f.noise);
    const double sinr1 = g[1][0] * f.p.p_lc[0] / (g[1][1] * f.p.p_lc[1] + f.noise);
    CHECK(rate(combined_sinr(rx, g, f.p, s, 0, 0, Criticality::kLow)) ==
          doctest::Approx(rate(sinr0 + sinr1)).epsilon(1e-6));
  }

  TEST_CASE("cooperating AP never loses SINR") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ux(0.0, 150.0), up(1e-4, 5e-3);
    ScenarioConfig c;
    for (int trial = 0; trial < 200; ++trial) {
      const auto topo = make_topology(c, {{ux(rng), ux(rng)}, {ux(rng), ux(rng)}});
      PowerAllocation p{{up(rng), up(rng)}, {up(rng), up(rng)}};
      const auto rx1 = stage1_receiver(topo, topo.order, kB);
      const auto rx2 = stage2_receiver(topo, topo.order, kB, 10, 0.01, {true, true});
      auto g = average_gains(topo);
      g[1][0] /= 21.0;
      SicState s(2);
      for (std::size_t ue = 0; ue < 2; ++ue)
        for (auto cls : {Criticality::kHigh, Criticality::kLow})
          for (std::size_t a = 0; a < 2; ++a)
            CHECK(combined_sinr(rx2, g, p, s, a, ue, cls) >= combined_sinr(rx1, g, p, s, a, ue, cls));
    }
  }

  TEST_CASE("cooperative decodes are credited one slot late") {
    Fixture f;
    const auto rx = stage2_receiver(f.topo, f.topo.order, kB, 10, 0.01, {false, true});
    const auto g = average_gains(f.topo);
    const auto rates = coding_rates_separate(rx, g, all(2, true), f.p);
    const auto out = decode_separate(rx, g, all(2, true), rates, f.p, 0.01, 1000);
    CHECK(out.offset_lc[1] == 1);  // UE 1 is served by the cooperating AP 1
    CHECK(out.offset_lc[0] == 0);
    CHECK(out.offset_hc[0] == 0);  // AP 0 decodes it directly
  }

  TEST_CASE("determinant rate equals the whitened MRC rate") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> up(1e-4, 5e-3);
    for (int trial = 0; trial < 200; ++trial) {
      ChannelMatrix h;
      for (auto& row : h) {
        row.resize(2);
        for (auto& x : row) x = std::complex<double>(gauss(rng), gauss(rng)) * 1e-5;
      }
      const PowerAllocation p{{up(rng), up(rng)}, {up(rng), up(rng)}};
      const PerAp<double> noise{1.6e-14, 2.3e-14};
      SicState s(2);
      s.cancel(1, Criticality::kHigh);
      // Uncancelled: both LC messages. Q = diag(noise) + sum p v v^H, inverted by hand.
      std::complex<double> q00 = noise[0], q11 = noise[1], q01 = 0;
      for (std::size_t k = 0; k < 2; ++k) {
        q00 += p.p_lc[k] * std::norm(h[0][k]);
        q11 += p.p_lc[k] * std::norm(h[1][k]);
        q01 += p.p_lc[k] * h[0][k] * std::conj(h[1][k]);
      }
      const std::complex<double> det = q00 * q11 - q01 * std::conj(q01);
      const std::complex<double> a = h[0][0], b = h[1][0];
      const std::complex<double> quad =
          (std::conj(a) * (q11 * a - q01 * b) + std::conj(b) * (-std::conj(q01) * a + q00 * b)) / det;
      const double expect = kB * std::log2(1.0 + p.p_hc[0] * quad.real());
      const double got = central_rate(h, p, s, 0, Criticality::kHigh, noise, kB);
      CHECK(got == doctest::Approx(expect).epsilon(1e-9));

      // With everything else cancelled the noise is diagonal.
      SicState done(2);
      done.cancel(0, Criticality::kHigh);
      done.cancel(1, Criticality::kHigh);
      done.cancel(1, Criticality::kLow);
      const double mrc = kB * std::log2(1.0 + p.p_lc[0] * (std::norm(a) / noise[0] + std::norm(b) / noise[1]));
      CHECK(central_rate(h, p, done, 0, Criticality::kLow, noise, kB) == doctest::Approx(mrc).epsilon(1e-9));
    }
  }

  TEST_CASE("central rate with one silent AP is the single-AP rate") {
    ChannelMatrix h{std::vector<std::complex<double>>{{3e-5, 1e-5}},
                    std::vector<std::complex<double>>{{0.0, 0.0}}};
    const PowerAllocation p{{6e-3}, {4e-3}};
    const PerAp<double> noise{1.6e-14, 1.6e-14};
    SicState s(1);
    const double g = std::norm(h[0][0]);
    CHECK(central_rate(h, p, s, 0, Criticality::kHigh, noise, kB) ==
          doctest::Approx(rate(g * 6e-3 / (g * 4e-3 + 1.6e-14))).epsilon(1e-9));
  }

  TEST_CASE("central sum rate dominates either single AP") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> up(1e-4, 5e-3);
    for (int trial = 0; trial < 300; ++trial) {
      ChannelMatrix h;
      for (auto& row : h) {
        row.resize(2);
        for (auto& x : row) x = std::complex<double>(gauss(rng), gauss(rng)) * 1e-5;
      }
      const PowerAllocation p{{up(rng), up(rng)}, {up(rng), up(rng)}};
      const PerAp<double> noise{1.6e-14, 1.6e-14};
      const auto order = central_order(h);
      const auto r = coding_rates_central(h, p, order, noise, kB);
      const double central = r.r_hc[0] + r.r_hc[1] + r.r_lc[0] + r.r_lc[1];
      for (std::size_t j = 0; j < 2; ++j) {
        double rx = 0;
        for (std::size_t k = 0; k < 2; ++k) rx += std::norm(h[j][k]) * (p.p_hc[k] + p.p_lc[k]);
        CHECK(central >= rate(rx / noise[j]) * (1 - 1e-9));
      }
    }
  }

  TEST_CASE("central decoding credits next slot and fails on a fresh blockage") {
    ChannelMatrix h{std::vector<std::complex<double>>{{3e-5, 0}, {1e-5, 1e-5}},
                    std::vector<std::complex<double>>{{1e-5, 0}, {2e-5, -1e-5}}};
    const PowerAllocation p{{6e-3, 5e-3}, {4e-3, 5e-3}};
    const PerAp<double> noise{1.6e-14, 1.6e-14};
    const auto order = central_order(h);
    CHECK(order == std::vector<std::size_t>{0, 1});
    const auto rates = coding_rates_central(h, p, order, noise, kB);
    auto out = decode_central(h, rates, p, order, noise, kB, 0.01, 1000);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(out.hc_delivered[i]);
      CHECK(out.eta_lc[i]);
      CHECK(out.offset_hc[i] == 1);
      CHECK(out.offset_lc[i] == 1);
    }
    auto blocked = h;
    blocked[0][0] *= 0.1;
    out = decode_central(blocked, rates, p, order, noise, kB, 0.01, 1000);
    CHECK_FALSE(out.hc_delivered[0]);
  }

  TEST_CASE("TDMA") {
    CHECK(tdma_rate(1e-9, 0.01, 1e-14, kB, 1) == doctest::Approx(rate(1e-9 * 0.01 / 1e-14)));
    CHECK(tdma_rate(1e-9, 0.01, 1e-14, kB, 4) == doctest::Approx(rate(1e3) / 4));
    Fixture f;
    const auto g_hat = average_gains(f.topo);
    auto g = g_hat;
    g[f.topo.assoc[1]][1] /= 21.0;
    const auto out = decode_tdma(f.topo, g, g_hat, 0.01, kB, 0.01, 1000);
    CHECK(out.eta[0]);
    CHECK(out.delivered[0] == packets_per_slot(out.coding_rate[0], 0.01, 1000));
    CHECK_FALSE(out.eta[1]);
    CHECK(out.delivered[1] == 0);
  }

  TEST_CASE("coding rates ignore an undetected blockage") {
    Fixture f;
    const auto rx = stage1_receiver(f.topo, f.topo.order, kB);
    LinkFlags clear = all(2, true), fresh = all(2, true);
    fresh[0][0] = false;  // true state changed, detection still reads LoS
    auto rng_a = make_fading_engines(9, 2), rng_b = make_fading_engines(9, 2);
    const auto a = realize_channel(f.topo, clear, clear, 20.0, rng_a);
    const auto b = realize_channel(f.topo, fresh, clear, 20.0, rng_b);
    const auto ra = coding_rates_separate(rx, a.power_hat(), clear, f.p);
    const auto rb = coding_rates_separate(rx, b.power_hat(), clear, f.p);
    CHECK(ra.r_hc == rb.r_hc);
    CHECK(ra.r_lc == rb.r_lc);
    CHECK(a.power()[0][0] != b.power()[0][0]);
  }
}
