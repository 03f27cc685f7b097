#include "airfeel/bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "airfeel/codec.hpp"

namespace airfeel::bounds {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check(const FadingBoundInput& in) {
  require(in.gamma > 0.0, "gamma must be positive");
  require(in.sigma_h > 0.0 && in.sigma_z > 0.0, "sigma_h and sigma_z must be positive");
  require(in.devices >= 1 && in.subchannels >= 1 && in.antennas >= 1,
          "K, N and N_r must be >= 1");
  require(in.epsilon > 0.0, "epsilon must be positive");
  require(in.delta > 0.0 && in.delta < 1.0, "delta must lie in (0, 1)");
}

long long ceil_count(double x) { return static_cast<long long>(std::ceil(x)); }

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double symbol_error_moment_eff(int q, double sigma_eff, ErrorMomentForm form) {
  const int m = codec::grid_side(q);
  require(sigma_eff >= 0.0, "sigma_eff must be non-negative");
  if (sigma_eff == 0.0) return 0.0;
  double e_r = 0.0;
  for (int l = 1; l < m; ++l) {
    const double q_inner = q_function((2.0 * l - 1.0) / (2.0 * sigma_eff));
    const double q_outer = q_function((2.0 * l + 1.0) / (2.0 * sigma_eff));
    double p = 2.0 * (1.0 - static_cast<double>(l) / m) * (q_inner - q_outer);
    // Transmitted edge symbols are pushed onto the outermost decision when
    // the noise overshoots the constellation.
    if (form == ErrorMomentForm::kExact) p += 2.0 / m * q_outer;
    e_r += static_cast<double>(l) * l * p;
  }
  return e_r;
}

double symbol_error_moment(int q, double sigma_z, int n_r, ErrorMomentForm form) {
  require(n_r >= 1, "N_r must be >= 1");
  return symbol_error_moment_eff(q, sigma_z / std::sqrt(2.0 * n_r), form);
}

double quantization_variance(int subchannels, int devices, int order, double delta_g) {
  require(subchannels >= 1 && devices >= 1, "N and K must be >= 1");
  codec::grid_side(order);
  const double qd = order;
  return subchannels * delta_g * delta_g / (3.0 * devices * qd * qd);
}

MseBound mse_awgn_bound_with_moment(const AwgnBoundInput& in, double e_r) {
  const codec::QuantizerSpec spec(in.order, in.delta_g);
  const double w = spec.cell_width();
  const double k = in.devices;
  MseBound out;
  out.channel = in.subchannels * (1.0 + in.order) * e_r / (k * k) * w * w;
  out.quantization = quantization_variance(in.subchannels, in.devices, in.order, in.delta_g);
  return out;
}

MseBound mse_awgn_bound(const AwgnBoundInput& in) {
  require(in.sigma_z2 >= 0.0, "sigma_z2 must be non-negative");
  return mse_awgn_bound_with_moment(
      in, symbol_error_moment(in.order, std::sqrt(in.sigma_z2), in.antennas));
}

double fading_c(const FadingBoundInput& in) {
  check(in);
  return 1.0 / in.gamma + in.sigma_h / in.sigma_z;
}

double expected_abs_error_fading(const FadingBoundInput& in) {
  const double c = fading_c(in);
  const double k = in.devices;
  return 4.0 * k * in.gamma / (std::sqrt(static_cast<double>(in.antennas)) * c) *
         (std::sqrt(std::numbers::pi) + std::log(6.0 * k));
}

long long antenna_bound_symbol(const FadingBoundInput& in, AntennaBoundVariant variant) {
  const double c = fading_c(in);
  const double k = in.devices;
  double rhs = 8.0 * in.gamma * in.gamma * k * k / (in.epsilon * in.epsilon * c * c) *
               std::log(6.0 * k / in.delta);
  if (variant == AntennaBoundVariant::kAppendix) {
    rhs *= (in.sigma_z * in.sigma_z) / (in.sigma_h * in.sigma_h);
  }
  return ceil_count(rhs);
}

MseBound mse_fading_bound(const FadingBoundInput& in, double delta_g, double unit_scale2) {
  const double c = fading_c(in);
  const double log6k = std::log(6.0 * in.devices);
  MseBound out;
  out.channel = 16.0 * in.subchannels * in.gamma * in.gamma * in.order /
                (in.antennas * c * c) * (std::numbers::pi + 2.0 * log6k * log6k) * unit_scale2;
  out.quantization = quantization_variance(in.subchannels, in.devices, in.order, delta_g);
  return out;
}

long long antenna_bound_gradient(const FadingBoundInput& in) {
  const double c = fading_c(in);
  return ceil_count(16.0 * in.gamma * in.gamma * in.subchannels * in.order /
                    (in.epsilon * in.epsilon * c * c) * std::log(6.0 * in.devices / in.delta));
}

double convergence_rhs(const ConvergenceInput& in) {
  const double step = in.eta * in.smoothness;
  if (!(step > 0.0 && step < 2.0)) {
    throw std::domain_error("convergence_rhs: requires 0 < eta * L < 2");
  }
  require(in.rounds >= 1, "T must be >= 1");
  const double denom = 1.0 - step / 2.0;
  return in.loss_gap / (in.rounds * in.eta * denom) +
         (step / 2.0) / denom * (in.sigma_ch2 + in.sigma_q2 + in.theta_bar);
}

double rate_distortion(double bandwidth, double source_variance, double distortion) {
  require(source_variance > 0.0 && distortion > 0.0, "variances must be positive");
  return std::max(bandwidth * std::log(source_variance / distortion), 0.0);
}

double latency(double symbol_time, double model_size, double rate) {
  if (rate <= 0.0) return kInfiniteLatency;
  return symbol_time * model_size / rate;
}

LatencyReport latency_suite(const LatencyInput& in) {
  require(in.bandwidth > 0.0 && in.symbol_time > 0.0 && in.model_size > 0.0,
          "bandwidth, symbol time and model size must be positive");
  require(in.devices >= 1 && in.antennas >= 1, "K and N_r must be >= 1");
  require(in.sigma_z2 > 0.0 && in.sigma_h2 > 0.0, "noise and channel variances must be positive");
  require(in.symbol_m2 > 0.0 && in.symbol_m1 >= 0.0, "symbol moments must be positive");
  require(in.delta_g > 0.0, "delta_g must be positive");
  const double k = in.devices;
  const double nr = in.antennas;
  const double q = in.order;
  codec::grid_side(in.order);

  // Cross-device symbol products, normalized by the K^2 of the average.
  const double sigma_int2 = in.symbol_m1 * in.symbol_m1;

  LatencyReport out;
  out.distortion_analog = in.sigma_z2 / (nr * k * in.sigma_h2) + (k - 1.0) * sigma_int2 / (3.0 * nr);
  out.source_analog = in.symbol_m2;

  const double e_r = symbol_error_moment_eff(in.order, std::sqrt(out.distortion_analog / 2.0));
  out.distortion_compfed =
      in.delta_g * in.delta_g / (q * q * k) + (1.0 + q) * e_r * e_r / (k * k);
  out.source_compfed = in.symbol_m2 * 2.0 * q * q / (q + 1.0);

  out.rate_analog = rate_distortion(in.bandwidth, out.source_analog, out.distortion_analog);
  out.rate_compfed = rate_distortion(in.bandwidth, out.source_compfed, out.distortion_compfed);
  out.rate_single_link = rate_distortion(1.0, out.source_compfed, out.distortion_compfed);

  out.t_analog = latency(in.symbol_time, in.model_size, out.rate_analog);
  out.t_compfed = latency(in.symbol_time, in.model_size, out.rate_compfed);
  const double t_single = latency(in.symbol_time, in.model_size, out.rate_single_link);
  out.t_ofdma = t_single == kInfiniteLatency ? kInfiniteLatency : k * t_single;
  out.gamma_ratio = out.rate_compfed > 0.0 ? out.rate_analog / out.rate_compfed : kInfiniteLatency;
  return out;
}

}  // namespace airfeel::bounds
