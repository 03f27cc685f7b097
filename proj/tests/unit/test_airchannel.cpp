#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "airfeel/airchannel.hpp"
#include "airfeel/random.hpp"
#include "doctest.h"

using namespace airfeel;

namespace {

SystemConfig small_system(int k, int nr, double sigma_z2 = 1.0) {
  SystemConfig cfg;
  cfg.devices = k;
  cfg.antennas = nr;
  cfg.sigma_z2 = sigma_z2;
  return cfg;
}

CVector random_symbols(int k, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVector s(static_cast<std::size_t>(k));
  for (cplx& v : s) v = {n(rng), n(rng)};
  return s;
}

struct Moments {
  double sum = 0.0;
  double sum2 = 0.0;
  long long count = 0;

  void add(double x) {
    sum += x;
    sum2 += x * x;
    ++count;
  }
  double mean() const { return sum / count; }
  double variance() const { return sum2 / count - mean() * mean(); }
  double se() const { return std::sqrt(variance() / count); }
};

}  // namespace

TEST_SUITE("airchannel") {
  TEST_CASE("validate rejects bad configurations") {
    SystemConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    for (auto mutate : {+[](SystemConfig& c) { c.devices = 0; },
                        +[](SystemConfig& c) { c.subchannels = 0; },
                        +[](SystemConfig& c) { c.antennas = 0; },
                        +[](SystemConfig& c) { c.sigma_h2 = 0.0; },
                        +[](SystemConfig& c) { c.sigma_z2 = -1.0; },
                        +[](SystemConfig& c) { c.p_max = 0.0; }}) {
      SystemConfig bad;
      mutate(bad);
      CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
  }

  TEST_CASE("realization dimensions are enforced") {
    CHECK_THROWS_AS(ChannelRealization(2, 3, CVector(5), CVector(3)), std::invalid_argument);
    CHECK_THROWS_AS(ChannelRealization(2, 3, CVector(6), CVector(2)), std::invalid_argument);
    ChannelRealization ch(2, 3);
    CHECK(ch.gain(1).size() == 3);
    CHECK(ch.noise().size() == 3);
  }

  TEST_CASE("complex gains have zero mean, unit second moment and split power evenly") {
    SystemConfig cfg = small_system(10, 100);
    Rng rng = derive_stream(11, {});
    Moments re, im, power, cross;
    for (int t = 0; t < 100; ++t) {
      const ChannelRealization ch = sample_channel(cfg, rng);
      for (int k = 0; k < cfg.devices; ++k) {
        const auto h = ch.gain(k);
        for (std::size_t i = 0; i < h.size(); ++i) {
          re.add(h[i].real());
          im.add(h[i].imag());
          power.add(std::norm(h[i]));
          if (i + 1 < h.size()) cross.add((std::conj(h[i]) * h[i + 1]).real());
        }
      }
    }
    CHECK(std::abs(re.mean()) <= 3 * re.se());
    CHECK(std::abs(im.mean()) <= 3 * im.se());
    CHECK(std::abs(power.mean() - cfg.sigma_h2) <= 3 * power.se());
    CHECK(re.variance() == doctest::Approx(0.5).epsilon(0.02));
    CHECK(im.variance() == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(cross.mean()) <= 3 * cross.se());
  }

  TEST_CASE("real law draws real gains and real noise") {
    SystemConfig cfg = small_system(5, 50, 2.0);
    cfg.law = ChannelLaw::kRealGaussian;
    Rng rng = derive_stream(12, {});
    Moments power, noise;
    for (int t = 0; t < 400; ++t) {
      const ChannelRealization ch = sample_channel(cfg, rng);
      for (int k = 0; k < cfg.devices; ++k) {
        for (const cplx& h : ch.gain(k)) {
          REQUIRE(h.imag() == 0.0);
          power.add(std::norm(h));
        }
      }
      for (const cplx& z : ch.noise()) {
        REQUIRE(z.imag() == 0.0);
        noise.add(std::norm(z));
      }
    }
    CHECK(std::abs(power.mean() - 1.0) <= 3 * power.se());
    CHECK(std::abs(noise.mean() - 2.0) <= 3 * noise.se());
  }

  TEST_CASE("resampling reproduces sample_channel from the same stream") {
    SystemConfig cfg = small_system(4, 7);
    Rng a = derive_stream(13, {1, 2, 3, 4});
    Rng b = derive_stream(13, {1, 2, 3, 4});
    const ChannelRealization first = sample_channel(cfg, a);
    ChannelRealization second(cfg.devices, cfg.antennas);
    resample_channel(cfg, b, second);
    for (int k = 0; k < cfg.devices; ++k) {
      for (int i = 0; i < cfg.antennas; ++i) CHECK(first.gain(k)[i] == second.gain(k)[i]);
    }
    for (int i = 0; i < cfg.antennas; ++i) CHECK(first.noise()[i] == second.noise()[i]);
  }

  TEST_CASE("apply_mac superposes the symbols") {
    ChannelRealization unit(1, 1, CVector{cplx(1.0)}, CVector{cplx(0.0)});
    const CVector one{cplx(0.5)};
    CHECK(apply_mac(one, unit)[0] == cplx(0.5));

    ChannelRealization ones(3, 4, CVector(12, cplx(1.0)), CVector(4));
    const CVector s{cplx(1, 2), cplx(-0.5, 0.25), cplx(3, -1)};
    for (const cplx& y : apply_mac(s, ones)) CHECK(y == s[0] + s[1] + s[2]);

    SystemConfig cfg = small_system(6, 9);
    Rng rng = derive_stream(14, {});
    const ChannelRealization ch = sample_channel(cfg, rng);
    const CVector sym = random_symbols(cfg.devices, rng);
    const CVector y = apply_mac(sym, ch);
    for (int i = 0; i < cfg.antennas; ++i) {
      cplx expected = ch.noise()[i];
      for (int k = 0; k < cfg.devices; ++k) expected += ch.gain(k)[i] * sym[k];
      CHECK(std::abs(y[i] - expected) <= 1e-12);
    }
    CHECK_THROWS_AS(apply_mac(CVector(5), ch), std::invalid_argument);
  }

  TEST_CASE("sum beamformer is the normalized gain sum") {
    SystemConfig cfg = small_system(1, 8);
    ChannelRealization ones(1, 8, CVector(8, cplx(1.0)), CVector(8));
    for (const cplx& u : sum_beamformer(ones, cfg)) CHECK(u == cplx(1.0 / 8));

    cfg = small_system(5, 6);
    cfg.sigma_h2 = 2.0;
    Rng rng = derive_stream(15, {});
    const ChannelRealization ch = sample_channel(cfg, rng);
    const CVector u = sum_beamformer(ch, cfg);
    CVector doubled_gains;
    for (int k = 0; k < cfg.devices; ++k) {
      for (const cplx& h : ch.gain(k)) doubled_gains.push_back(2.0 * h);
    }
    const ChannelRealization doubled(5, 6, doubled_gains, CVector(6));
    const CVector u2 = sum_beamformer(doubled, cfg);
    for (int i = 0; i < cfg.antennas; ++i) {
      cplx expected{};
      for (int k = 0; k < cfg.devices; ++k) expected += ch.gain(k)[i];
      expected /= cfg.antennas * cfg.sigma_h2;
      CHECK(std::abs(u[i] - expected) <= 1e-12);
      CHECK(std::abs(u2[i] - 2.0 * u[i]) <= 1e-12);
    }
  }

  TEST_CASE("combine conjugates the beamformer") {
    const CVector y{cplx(2, -1), cplx(5, 5), cplx(-3, 0)};
    const CVector e1{cplx(1), cplx(0), cplx(0)};
    CHECK(combine(e1, y) == y[0]);
    const CVector u{cplx(0, 1), cplx(0), cplx(0)};
    CHECK(combine(u, y) == std::conj(u[0]) * y[0]);
    CHECK_THROWS_AS(combine(e1, CVector(2)), std::invalid_argument);

    SystemConfig cfg = small_system(1, 12, 0.0);
    Rng rng = derive_stream(16, {});
    const ChannelRealization ch = sample_channel(cfg, rng);
    const cplx s(0.7, -1.3);
    double energy = 0.0;
    for (const cplx& h : ch.gain(0)) energy += std::norm(h);
    const cplx s_hat = combine(sum_beamformer(ch, cfg), apply_mac(CVector{s}, ch));
    CHECK(std::abs(s_hat - energy / (cfg.antennas * cfg.sigma_h2) * s) <= 1e-12);
  }

  TEST_CASE("single device estimate concentrates with many antennas") {
    SystemConfig cfg = small_system(1, 10000, 0.0);
    Rng rng = derive_stream(17, {});
    int close = 0;
    const int trials = 200;
    const cplx s(1.0, 0.5);
    for (int t = 0; t < trials; ++t) {
      const ChannelRealization ch = sample_channel(cfg, rng);
      if (std::abs(combine(sum_beamformer(ch, cfg), apply_mac(CVector{s}, ch)) - s) <= 0.1) ++close;
    }
    CHECK(close >= 0.99 * trials);
  }

  TEST_CASE("transmit_awgn adds noise of variance sigma_z2 / N_r") {
    const CVector s{cplx(1, 1), cplx(-0.5, 2)};
    Rng rng = derive_stream(18, {});
    CHECK(transmit_awgn(s, small_system(2, 4, 0.0), rng) == s[0] + s[1]);

    auto empirical = [&](int nr) {
      const SystemConfig cfg = small_system(2, nr, 3.0);
      Moments err, re;
      for (int t = 0; t < 1000000; ++t) {
        const cplx e = transmit_awgn(s, cfg, rng) - (s[0] + s[1]);
        err.add(std::norm(e));
        re.add(e.real());
      }
      CHECK(std::abs(err.mean() - 3.0 / nr) <= 3 * err.se());
      CHECK(re.variance() == doctest::Approx(1.5 / nr).epsilon(0.01));
      return err.mean();
    };
    const double v10 = empirical(10);
    const double v100 = empirical(100);
    CHECK(v10 / v100 == doctest::Approx(10.0).epsilon(0.02));
  }

  TEST_CASE("error decomposition sums to the combining error") {
    SystemConfig cfg = small_system(1, 16, 0.0);
    Rng rng = derive_stream(19, {});
    ChannelRealization ch = sample_channel(cfg, rng);
    const CVector one{cplx(0.3, -0.8)};
    const ErrorDecomposition single = error_decomposition(ch, one, cfg);
    double energy = 0.0;
    for (const cplx& h : ch.gain(0)) energy += std::norm(h);
    CHECK(std::abs(single.e_int) <= 1e-12);
    CHECK(single.e_noise == cplx(0.0));
    CHECK(std::abs(single.e_sig - (energy / cfg.antennas - 1.0) * one[0]) <= 1e-12);

    cfg = small_system(7, 20, 0.5);
    for (int t = 0; t < 200; ++t) {
      ch = sample_channel(cfg, rng);
      const CVector s = random_symbols(cfg.devices, rng);
      cplx truth{};
      for (const cplx& v : s) truth += v;
      const cplx total = combine(sum_beamformer(ch, cfg), apply_mac(s, ch)) - truth;
      const ErrorDecomposition e = error_decomposition(ch, s, cfg);
      CHECK(std::abs(e.total() - total) <= 1e-9 * std::max(1.0, std::abs(total)));

      // Pairwise definition of the interference term.
      cplx interference{};
      for (int a = 0; a < cfg.devices; ++a) {
        for (int b = 0; b < cfg.devices; ++b) {
          if (a == b) continue;
          cplx ip{};
          for (int i = 0; i < cfg.antennas; ++i) ip += std::conj(ch.gain(a)[i]) * ch.gain(b)[i];
          interference += ip * s[b];
        }
      }
      interference /= cfg.antennas * cfg.sigma_h2;
      CHECK(std::abs(e.e_int - interference) <= 1e-9 * std::max(1.0, std::abs(interference)));
    }
    CHECK_THROWS_AS(error_decomposition(ch, CVector(3), cfg), std::invalid_argument);
  }

  TEST_CASE("error terms are zero mean and the noise term has variance K sigma_z2 / (sigma_h2 N_r)") {
    SystemConfig cfg = small_system(4, 8, 2.0);
    Rng rng = derive_stream(20, {});
    std::uniform_real_distribution<double> level(-1.0, 1.0);
    Moments sig, inter, noise, noise_power;
    for (int t = 0; t < 100000; ++t) {
      const ChannelRealization ch = sample_channel(cfg, rng);
      CVector s(static_cast<std::size_t>(cfg.devices));
      for (cplx& v : s) v = {level(rng), level(rng)};
      const ErrorDecomposition e = error_decomposition(ch, s, cfg);
      sig.add(e.e_sig.real());
      inter.add(e.e_int.imag());
      noise.add(e.e_noise.real());
      noise_power.add(std::norm(e.e_noise));
    }
    CHECK(std::abs(sig.mean()) <= 3 * sig.se());
    CHECK(std::abs(inter.mean()) <= 3 * inter.se());
    CHECK(std::abs(noise.mean()) <= 3 * noise.se());
    const double expected = cfg.devices * cfg.sigma_z2 / (cfg.sigma_h2 * cfg.antennas);
    CHECK(std::abs(noise_power.mean() - expected) <= 3 * noise_power.se());
  }

  TEST_CASE("combining error variance falls as antennas are added") {
    double previous = INFINITY;
    for (int nr : {10, 50, 200, 800}) {
      SystemConfig cfg = small_system(10, nr);
      Rng rng = derive_stream(21, {static_cast<std::uint64_t>(nr)});
      Moments err;
      for (int t = 0; t < 2000; ++t) {
        const ChannelRealization ch = sample_channel(cfg, rng);
        const CVector s = random_symbols(cfg.devices, rng);
        cplx truth{};
        for (const cplx& v : s) truth += v;
        err.add(std::norm(combine(sum_beamformer(ch, cfg), apply_mac(s, ch)) - truth));
      }
      CHECK(err.mean() < previous);
      previous = err.mean();
    }
  }
}
