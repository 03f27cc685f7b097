// Closed-form error, antenna, convergence and latency calculators.
#pragma once

#include <limits>

namespace airfeel::bounds {

/// Standard normal tail probability.
double q_function(double x);

enum class ErrorMomentForm {
  kExact,      // clamped 2^b-PAM including the edge-symbol term
  kTruncated,  // interior-symbol expression only
};

/// E[l^2] of the integer decision error of a unit-spaced 2^b-PAM slicer under
/// Gaussian noise with per-dimension deviation sigma_eff.
double symbol_error_moment_eff(int q, double sigma_eff,
                               ErrorMomentForm form = ErrorMomentForm::kExact);

/// Same with sigma_eff = sigma_z / sqrt(2 N_r).
double symbol_error_moment(int q, double sigma_z, int n_r,
                           ErrorMomentForm form = ErrorMomentForm::kExact);

struct MseBound {
  double channel = 0.0;
  double quantization = 0.0;

  double total() const { return channel + quantization; }
};

/// sigma_z2 is the noise variance seen on the unit-spaced lattice.
struct AwgnBoundInput {
  int subchannels = 1;  // N
  int devices = 1;      // K
  int order = 4;        // q
  double delta_g = 1.0;
  double sigma_z2 = 1.0;
  int antennas = 1;  // N_r
};

/// N Delta_g^2 / (3 K q^2).
double quantization_variance(int subchannels, int devices, int order, double delta_g);

/// Channel part N (1 + q) e_r / K^2 in squared lattice steps, scaled by the
/// squared cell width 2 Delta_g / q into gradient units.
MseBound mse_awgn_bound(const AwgnBoundInput& in);
MseBound mse_awgn_bound_with_moment(const AwgnBoundInput& in, double e_r);

struct FadingBoundInput {
  double gamma = 1.0;  // sum_k |s_k|, worst case over subchannels
  double sigma_h = 1.0;
  double sigma_z = 1.0;
  int devices = 1;      // K
  int subchannels = 1;  // N
  int order = 4;        // q
  int antennas = 1;     // N_r
  double epsilon = 1.0;
  double delta = 0.01;
};

enum class AntennaBoundVariant {
  kTheorem,   // 8 gamma^2 K^2 / (eps^2 c^2) ln(6K/delta)
  kAppendix,  // same times sigma_z^2 / sigma_h^2
};

/// c = 1/gamma + sigma_h / sigma_z.
double fading_c(const FadingBoundInput& in);

/// 4 K gamma / (sqrt(N_r) c) (sqrt(pi) + ln 6K).
double expected_abs_error_fading(const FadingBoundInput& in);

long long antenna_bound_symbol(const FadingBoundInput& in,
                               AntennaBoundVariant variant = AntennaBoundVariant::kTheorem);

/// sigma_fad^2 = 16 N gamma^2 q / (N_r c^2) (pi + 2 (ln 6K)^2), multiplied by
/// unit_scale2 to change units, plus the quantization variance.
MseBound mse_fading_bound(const FadingBoundInput& in, double delta_g, double unit_scale2 = 1.0);

/// ceil(16 gamma^2 N q / (eps^2 c^2) ln(6K/delta)).
long long antenna_bound_gradient(const FadingBoundInput& in);

struct ConvergenceInput {
  double eta = 0.1;
  double smoothness = 1.0;  // L
  int rounds = 1;           // T
  double loss_gap = 1.0;
  double sigma_ch2 = 0.0;
  double sigma_q2 = 0.0;
  double theta_bar = 0.0;
};

/// gap / (T eta (1 - eta L/2)) + (eta L/2) / (1 - eta L/2) (sigma_ch2 + sigma_q2 + theta_bar).
/// Throws std::domain_error unless 0 < eta L < 2.
double convergence_rhs(const ConvergenceInput& in);

struct LatencyInput {
  double bandwidth = 1e3;      // B, Hz
  double symbol_time = 1e-3;   // T_s, s
  double model_size = 1e2;     // N
  int devices = 20;            // K
  int antennas = 100;          // N_r
  int order = 256;             // q
  double sigma_z2 = 1.0;
  double sigma_h2 = 1.0;
  double symbol_m2 = 1.0 / 3.0;  // E|s|^2
  double symbol_m1 = 0.5;        // E|s|
  double delta_g = 1.0;
};

inline constexpr double kInfiniteLatency = std::numeric_limits<double>::infinity();

struct LatencyReport {
  double distortion_analog = 0.0;
  double distortion_compfed = 0.0;
  double source_analog = 0.0;
  double source_compfed = 0.0;
  double rate_analog = 0.0;
  double rate_compfed = 0.0;
  double rate_single_link = 0.0;
  double t_analog = 0.0;
  double t_compfed = 0.0;
  double t_ofdma = 0.0;
  double gamma_ratio = 0.0;  // t_compfed / t_analog
};

/// R(d) = max(B ln(s / d), 0).
double rate_distortion(double bandwidth, double source_variance, double distortion);

/// T_s N / R, or kInfiniteLatency when R = 0.
double latency(double symbol_time, double model_size, double rate);

LatencyReport latency_suite(const LatencyInput& in);

}  // namespace airfeel::bounds
