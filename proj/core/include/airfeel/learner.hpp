// Desk-scale models with analytic gradients over a flat parameter vector.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "airfeel/dataset.hpp"
#include "airfeel/random.hpp"

namespace airfeel {

enum class LearnerFamily { kLinearRegression, kSoftmaxRegression, kMlp };

/// Parameter layouts (row-major weights, then biases):
///   linear-regression  w[d], b                       squared error / 2
///   softmax-regression W[C][d], b[C]                 cross-entropy
///   one-hidden-layer   W1[H][d], b1[H], W2[C][H], b2[C], tanh hidden units
struct LearnerSpec {
  LearnerFamily family = LearnerFamily::kSoftmaxRegression;
  int input_dim = 1;
  int class_count = 2;
  int hidden_units = 16;

  std::size_t parameter_count() const;
  void validate() const;
};

/// Zero weights for the convex models; small Gaussian weights for the MLP.
std::vector<double> initial_parameters(const LearnerSpec& spec, Rng& rng);

/// Mean loss over `indices` (all samples when empty); writes the mean
/// gradient into `grad` when it is non-empty.
double loss_and_gradient(const LearnerSpec& spec, std::span<const double> w, const Dataset& data,
                         std::span<const std::size_t> indices, std::span<double> grad);

/// Mean loss over the whole dataset and classification accuracy (0 for
/// regression data).
struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const LearnerSpec& spec, std::span<const double> w, const Dataset& data);

}  // namespace airfeel
