#include "airfeel/powerctl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "airfeel/codec.hpp"

namespace airfeel {

std::int64_t PowerScaling::total_size() const {
  return std::accumulate(dataset_sizes.begin(), dataset_sizes.end(), std::int64_t{0});
}

bool PowerScaling::equal_sizes() const {
  return std::adjacent_find(dataset_sizes.begin(), dataset_sizes.end(),
                            std::not_equal_to<>()) == dataset_sizes.end();
}

double qam_peak_energy(int q) {
  const double half_span = (codec::grid_side(q) - 1) / 2.0;
  return 2.0 * half_span * half_span;
}

PowerScaling select_beta(std::span<const std::int64_t> dataset_sizes, int subchannels,
                         double peak_symbol_energy, double p_max, double margin) {
  if (dataset_sizes.empty()) throw std::invalid_argument("select_beta: no dataset sizes");
  if (!(margin >= 1.0)) throw std::invalid_argument("select_beta: margin must be >= 1");
  if (subchannels < 1) throw std::invalid_argument("select_beta: N must be >= 1");
  if (!(p_max > 0.0)) throw std::invalid_argument("select_beta: p_max must be positive");
  if (!(peak_symbol_energy > 0.0)) {
    throw std::invalid_argument("select_beta: peak symbol energy must be positive");
  }
  const std::int64_t largest = *std::max_element(dataset_sizes.begin(), dataset_sizes.end());
  if (*std::min_element(dataset_sizes.begin(), dataset_sizes.end()) < 1) {
    throw std::invalid_argument("select_beta: dataset sizes must be >= 1");
  }
  const double d = static_cast<double>(largest);
  PowerScaling out;
  out.beta = margin * d * d * subchannels * peak_symbol_energy / p_max;
  out.dataset_sizes.assign(dataset_sizes.begin(), dataset_sizes.end());
  return out;
}

PowerScaling select_beta(std::span<const std::int64_t> dataset_sizes, const SystemConfig& cfg,
                         double margin) {
  return select_beta(dataset_sizes, cfg.subchannels, qam_peak_energy(cfg.order), cfg.p_max,
                     margin);
}

cplx preprocess(cplx x, std::int64_t d_k, const PowerScaling& scaling) {
  return x * (static_cast<double>(d_k) / std::sqrt(scaling.beta));
}

CVector preprocess(std::span<const cplx> x, std::int64_t d_k, const PowerScaling& scaling) {
  CVector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(),
                 [&](cplx v) { return preprocess(v, d_k, scaling); });
  return out;
}

cplx postprocess(cplx s_hat, const PowerScaling& scaling) {
  const std::int64_t total = scaling.total_size();
  if (total < 1) throw std::invalid_argument("postprocess: empty dataset sizes");
  return s_hat * (std::sqrt(scaling.beta) / static_cast<double>(total));
}

CVector postprocess(std::span<const cplx> s_hat, const PowerScaling& scaling) {
  CVector out(s_hat.size());
  std::transform(s_hat.begin(), s_hat.end(), out.begin(),
                 [&](cplx v) { return postprocess(v, scaling); });
  return out;
}

bool power_check(std::span<const cplx> frame, double p_max) {
  double energy = 0.0;
  for (const cplx& v : frame) energy += std::norm(v);
  return energy <= p_max;
}

}  // namespace airfeel
