// Transmit scaling under the per-device power budget and receive-side
// denormalization.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "airfeel/airchannel.hpp"

namespace airfeel {

struct PowerScaling {
  double beta = 1.0;
  std::vector<std::int64_t> dataset_sizes;

  std::int64_t total_size() const;
  bool equal_sizes() const;
};

inline constexpr double kDefaultBetaMargin = 1.1;

/// Largest |x|^2 of a q-QAM encoder output, 2 * ((2^b - 1) / 2)^2.
double qam_peak_energy(int q);

/// beta = margin * max_k |D_k|^2 * N * peak_symbol_energy / P_max, so every
/// frame whose symbols satisfy |x|^2 <= peak_symbol_energy meets the budget.
PowerScaling select_beta(std::span<const std::int64_t> dataset_sizes, int subchannels,
                         double peak_symbol_energy, double p_max, double margin);

/// Digital case: peak_symbol_energy = qam_peak_energy(cfg.order).
PowerScaling select_beta(std::span<const std::int64_t> dataset_sizes, const SystemConfig& cfg,
                         double margin = kDefaultBetaMargin);

/// s_k = |D_k| x_k / sqrt(beta).
CVector preprocess(std::span<const cplx> x, std::int64_t d_k, const PowerScaling& scaling);
cplx preprocess(cplx x, std::int64_t d_k, const PowerScaling& scaling);

/// r = sqrt(beta) s_hat / sum_k |D_k|.
CVector postprocess(std::span<const cplx> s_hat, const PowerScaling& scaling);
cplx postprocess(cplx s_hat, const PowerScaling& scaling);

/// ||frame||^2 <= p_max, boundary inclusive.
bool power_check(std::span<const cplx> frame, double p_max);

}  // namespace airfeel
