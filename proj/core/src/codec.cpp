#include "airfeel/codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace airfeel::codec {

namespace {

// Round half up to the nearest integer.
double round_half_up(double x) { return std::floor(x + 0.5); }

}  // namespace

int grid_side(int q) {
  if (q < 4) {
    throw std::invalid_argument("q must be a power of 4, got " + std::to_string(q));
  }
  int side = 1;
  int value = 1;
  while (value < q) {
    value *= 4;
    side *= 2;
  }
  if (value != q) {
    throw std::invalid_argument("q must be a power of 4, got " + std::to_string(q));
  }
  return side;
}

QuantizerSpec::QuantizerSpec(int q, double delta_g)
    : q_(q), side_(grid_side(q)), delta_g_(delta_g) {
  if (!(delta_g > 0.0) || !std::isfinite(delta_g)) {
    throw std::invalid_argument("delta_g must be positive and finite");
  }
}

int quantize(double g, const QuantizerSpec& spec) {
  if (std::isnan(g)) throw std::invalid_argument("quantize: NaN gradient entry");
  const double d = spec.delta_g();
  if (g <= -d) return 0;
  if (g >= d) return spec.levels() - 1;
  const auto cell = static_cast<long long>(std::floor((g + d) / spec.cell_width()));
  return static_cast<int>(std::clamp<long long>(cell, 0, spec.levels() - 1));
}

double dequantize(double avg_level, const QuantizerSpec& spec) {
  if (!(avg_level >= 0.0 && avg_level <= spec.levels() - 1)) {
    throw std::out_of_range("dequantize: average level outside [0, q-1]");
  }
  return -spec.delta_g() + (avg_level + 0.5) * spec.cell_width();
}

double dequantize(const AverageLevel& avg, const QuantizerSpec& spec) {
  return dequantize(avg.value(), spec);
}

EncodedSymbol encode(int level, int q) {
  const int side = grid_side(q);
  if (level < 0 || level >= q) {
    throw std::out_of_range("encode: level " + std::to_string(level) + " outside [0, q-1]");
  }
  const double offset = (1.0 - side) / 2.0;
  return {static_cast<double>(level % side) + offset,
          static_cast<double>(level / side) + offset};
}

double round_half(double z) { return std::floor(z) + 0.5; }

LevelSum decode_sum(std::complex<double> s_hat, int k, int q) {
  if (k < 1) throw std::invalid_argument("decode_sum: k must be >= 1");
  const int side = grid_side(q);
  if (!std::isfinite(s_hat.real()) || !std::isfinite(s_hat.imag())) {
    throw std::invalid_argument("decode_sum: non-finite sample");
  }
  const double offset = k * (side - 1) / 2.0;
  const double top = static_cast<double>(k) * (side - 1);
  const double m_re = std::clamp(round_half_up(s_hat.real() + offset), 0.0, top);
  const double m_im = std::clamp(round_half_up(s_hat.imag() + offset), 0.0, top);
  return {static_cast<std::int64_t>(m_re) + side * static_cast<std::int64_t>(m_im), k};
}

AverageLevel decode_avg(std::complex<double> s_hat, int k, int q) {
  const LevelSum sum = decode_sum(s_hat, k, q);
  return {sum.value, sum.k};
}

std::vector<EncodedSymbol> constellation(int q) {
  grid_side(q);
  std::vector<EncodedSymbol> points;
  points.reserve(static_cast<std::size_t>(q));
  for (int level = 0; level < q; ++level) points.push_back(encode(level, q));
  return points;
}

}  // namespace airfeel::codec
