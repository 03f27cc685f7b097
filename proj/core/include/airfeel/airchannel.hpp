// Fading multiple-access channel with N_r receive antennas and blind
// sum-of-channels receive beamforming.
#pragma once

#include <complex>
#include <span>
#include <vector>

#include "airfeel/random.hpp"

namespace airfeel {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

enum class ChannelLaw { kComplexGaussian, kRealGaussian };

/// Network and channel parameters shared by every module.
struct SystemConfig {
  int devices = 20;       // K
  int subchannels = 100;  // N
  int antennas = 100;     // N_r
  int order = 256;        // q
  double sigma_h2 = 1.0;
  double sigma_z2 = 1.0;
  double p_max = 1.0;
  ChannelLaw law = ChannelLaw::kComplexGaussian;

  /// Throws std::invalid_argument on non-positive counts or variances.
  void validate() const;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

/// One subchannel: K x N_r gains (row k is device k) and an N_r noise draw.
class ChannelRealization {
 public:
  ChannelRealization(int devices, int antennas);
  ChannelRealization(int devices, int antennas, CVector gains, CVector noise);

  int devices() const { return devices_; }
  int antennas() const { return antennas_; }

  std::span<const cplx> gain(int k) const;
  std::span<cplx> gain(int k);
  std::span<const cplx> noise() const { return noise_; }
  std::span<cplx> noise() { return noise_; }

 private:
  int devices_;
  int antennas_;
  CVector gains_;
  CVector noise_;
};

/// e_sig + e_int + e_noise = combine(u, y) - sum_k s_k.
struct ErrorDecomposition {
  cplx e_sig;
  cplx e_int;
  cplx e_noise;

  cplx total() const { return e_sig + e_int + e_noise; }
};

/// Zero-mean draw with E|x|^2 = variance: circular complex (variance/2 per
/// dimension) or real.
cplx draw_gaussian(Rng& rng, double variance, ChannelLaw law);

/// i.i.d. gains with variance sigma_h2 and noise with variance sigma_z2.
ChannelRealization sample_channel(const SystemConfig& cfg, Rng& rng);

/// Refills `ch` in place; same draw order as sample_channel.
void resample_channel(const SystemConfig& cfg, Rng& rng, ChannelRealization& ch);

/// y = sum_k h_k s_k + z.
CVector apply_mac(std::span<const cplx> symbols, const ChannelRealization& ch);

/// u = sum_k h_k / (N_r sigma_h^2).
CVector sum_beamformer(const ChannelRealization& ch, const SystemConfig& cfg);

/// s_hat = u^H y. Conjugating the beamformer keeps the data unconjugated, so
/// the diagonal term reads ||h_k||^2 s_k / (sigma_h^2 N_r).
cplx combine(std::span<const cplx> u, std::span<const cplx> y);

/// Reduced-noise abstraction: sum_k s_k + z~, E|z~|^2 = sigma_z2 / N_r.
cplx transmit_awgn(std::span<const cplx> symbols, const SystemConfig& cfg, Rng& rng);

ErrorDecomposition error_decomposition(const ChannelRealization& ch,
                                       std::span<const cplx> symbols,
                                       const SystemConfig& cfg);

}  // namespace airfeel
