// Quantized-gradient lattice codec for digital over-the-air summation.
//
// Each device maps a gradient entry to one of q levels, and each level to a
// point of a unit-spaced, zero-mean q-QAM grid: the in-phase coordinate
// carries the residue level mod 2^b and the quadrature coordinate carries the
// quotient floor(level / 2^b). Superposing K such points lands on the sum
// lattice, from which the exact integer sum of levels is recovered.

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace airfeel::codec {

/// Side length 2^b of the square q-QAM grid; throws std::invalid_argument
/// unless q is a power of 4 (q >= 4).
int grid_side(int q);

/// q uniform cells over the clip interval [-delta_g, delta_g].
class QuantizerSpec {
 public:
  QuantizerSpec(int q, double delta_g);

  int levels() const { return q_; }
  int side() const { return side_; }
  double delta_g() const { return delta_g_; }
  double cell_width() const { return 2.0 * delta_g_ / q_; }

  friend bool operator==(const QuantizerSpec&, const QuantizerSpec&) = default;

 private:
  int q_;
  int side_;
  double delta_g_;
};

struct EncodedSymbol {
  double re = 0.0;
  double im = 0.0;

  std::complex<double> value() const { return {re, im}; }
  friend bool operator==(const EncodedSymbol&, const EncodedSymbol&) = default;
};

/// Decoded integer sum of K levels, 0 <= value <= k * (q - 1).
struct LevelSum {
  std::int64_t value = 0;
  int k = 1;
};

/// Exact average sum / k on the q*K grid.
struct AverageLevel {
  std::int64_t sum = 0;
  int k = 1;

  double value() const { return static_cast<double>(sum) / k; }
};

// Clips g to [-delta_g, delta_g] and returns the cell index in [0, q-1].
// Interior cell boundaries belong to the upper cell.
int quantize(double g, const QuantizerSpec& spec);

// Cell-center reconstruction, -delta_g + (avg_level + 1/2) * cell_width.
double dequantize(double avg_level, const QuantizerSpec& spec);
double dequantize(const AverageLevel& avg, const QuantizerSpec& spec);

EncodedSymbol encode(int level, int q);

/// Nearest point of Z + 1/2, floor(z) + 1/2; ties at integers go up.
double round_half(double z);

/// Nearest point of the k-user sum lattice, component-wise and clamped to the
/// lattice extent, mapped back to the level sum m_re + 2^b * m_im.
LevelSum decode_sum(std::complex<double> s_hat, int k, int q);

AverageLevel decode_avg(std::complex<double> s_hat, int k, int q);

/// All q encoder outputs in level order.
std::vector<EncodedSymbol> constellation(int q);

}  // namespace airfeel::codec
