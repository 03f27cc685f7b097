#include "airfeel/airchannel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace airfeel {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// <a, b> = sum_i conj(a_i) b_i
cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

}  // namespace

void SystemConfig::validate() const {
  require(devices >= 1, "K (devices) must be >= 1");
  require(subchannels >= 1, "N (subchannels) must be >= 1");
  require(antennas >= 1, "Nr (antennas) must be >= 1");
  require(order >= 4, "q must be a power of 4");
  require(sigma_h2 > 0.0, "sigma_h2 must be positive");
  require(sigma_z2 >= 0.0, "sigma_z2 must be non-negative");
  require(p_max > 0.0, "p_max must be positive");
}

ChannelRealization::ChannelRealization(int devices, int antennas)
    : ChannelRealization(devices, antennas,
                         CVector(static_cast<std::size_t>(devices) * antennas),
                         CVector(static_cast<std::size_t>(antennas))) {}

ChannelRealization::ChannelRealization(int devices, int antennas, CVector gains, CVector noise)
    : devices_(devices), antennas_(antennas), gains_(std::move(gains)), noise_(std::move(noise)) {
  require(devices >= 1 && antennas >= 1, "channel dimensions must be positive");
  require(gains_.size() == static_cast<std::size_t>(devices) * antennas,
          "gain matrix must hold K x N_r entries");
  require(noise_.size() == static_cast<std::size_t>(antennas), "noise must hold N_r entries");
}

std::span<const cplx> ChannelRealization::gain(int k) const {
  return std::span<const cplx>(gains_).subspan(static_cast<std::size_t>(k) * antennas_,
                                               static_cast<std::size_t>(antennas_));
}

std::span<cplx> ChannelRealization::gain(int k) {
  return std::span<cplx>(gains_).subspan(static_cast<std::size_t>(k) * antennas_,
                                         static_cast<std::size_t>(antennas_));
}

cplx draw_gaussian(Rng& rng, double variance, ChannelLaw law) {
  if (variance == 0.0) return {};
  if (law == ChannelLaw::kRealGaussian) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance));
    return {normal(rng), 0.0};
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

void resample_channel(const SystemConfig& cfg, Rng& rng, ChannelRealization& ch) {
  require(ch.devices() == cfg.devices && ch.antennas() == cfg.antennas,
          "channel realization does not match the system configuration");
  const bool real = cfg.law == ChannelLaw::kRealGaussian;
  std::normal_distribution<double> gain_draw(0.0, std::sqrt(real ? cfg.sigma_h2 : cfg.sigma_h2 / 2.0));
  for (int k = 0; k < cfg.devices; ++k) {
    for (cplx& h : ch.gain(k)) {
      const double re = gain_draw(rng);
      const double im = real ? 0.0 : gain_draw(rng);
      h = {re, im};
    }
  }
  for (cplx& z : ch.noise()) z = draw_gaussian(rng, cfg.sigma_z2, cfg.law);
}

ChannelRealization sample_channel(const SystemConfig& cfg, Rng& rng) {
  cfg.validate();
  ChannelRealization ch(cfg.devices, cfg.antennas);
  resample_channel(cfg, rng, ch);
  return ch;
}

CVector apply_mac(std::span<const cplx> symbols, const ChannelRealization& ch) {
  if (symbols.size() != static_cast<std::size_t>(ch.devices())) {
    throw std::invalid_argument("apply_mac: expected " + std::to_string(ch.devices()) +
                                " symbols, got " + std::to_string(symbols.size()));
  }
  CVector y(ch.noise().begin(), ch.noise().end());
  for (int k = 0; k < ch.devices(); ++k) {
    const auto h = ch.gain(k);
    const cplx s = symbols[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h[i] * s;
  }
  return y;
}

CVector sum_beamformer(const ChannelRealization& ch, const SystemConfig& cfg) {
  CVector u(static_cast<std::size_t>(ch.antennas()));
  for (int k = 0; k < ch.devices(); ++k) {
    const auto h = ch.gain(k);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += h[i];
  }
  const double scale = 1.0 / (ch.antennas() * cfg.sigma_h2);
  for (cplx& v : u) v *= scale;
  return u;
}

cplx combine(std::span<const cplx> u, std::span<const cplx> y) {
  if (u.size() != y.size()) throw std::invalid_argument("combine: length mismatch");
  return inner(u, y);
}

cplx transmit_awgn(std::span<const cplx> symbols, const SystemConfig& cfg, Rng& rng) {
  cplx sum{};
  for (const cplx& s : symbols) sum += s;
  return sum + draw_gaussian(rng, cfg.sigma_z2 / cfg.antennas, ChannelLaw::kComplexGaussian);
}

ErrorDecomposition error_decomposition(const ChannelRealization& ch,
                                       std::span<const cplx> symbols,
                                       const SystemConfig& cfg) {
  if (symbols.size() != static_cast<std::size_t>(ch.devices())) {
    throw std::invalid_argument("error_decomposition: symbol count differs from K");
  }
  const double norm = 1.0 / (cfg.sigma_h2 * ch.antennas());

  // Cross terms via <sum_k h_k, sum_k' h_k' s_k'> minus the diagonal.
  CVector h_sum(static_cast<std::size_t>(ch.antennas()));
  CVector h_weighted(static_cast<std::size_t>(ch.antennas()));
  ErrorDecomposition out{};
  cplx diagonal{};
  for (int k = 0; k < ch.devices(); ++k) {
    const auto h = ch.gain(k);
    const cplx s = symbols[static_cast<std::size_t>(k)];
    double energy = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      h_sum[i] += h[i];
      h_weighted[i] += h[i] * s;
      energy += std::norm(h[i]);
    }
    out.e_sig += (energy * norm - 1.0) * s;
    diagonal += energy * s;
  }
  out.e_int = (inner(h_sum, h_weighted) - diagonal) * norm;
  out.e_noise = inner(h_sum, ch.noise()) * norm;
  return out;
}

}  // namespace airfeel
