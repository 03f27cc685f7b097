#include "airfeel/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace airfeel {

namespace {

void check_data(const LearnerSpec& spec, std::span<const double> w, const Dataset& data) {
  if (w.size() != spec.parameter_count()) {
    throw std::invalid_argument("learner: expected " + std::to_string(spec.parameter_count()) +
                                " parameters, got " + std::to_string(w.size()));
  }
  if (data.feature_dim != spec.input_dim) {
    throw std::invalid_argument("learner: dataset has " + std::to_string(data.feature_dim) +
                                " features, model expects " + std::to_string(spec.input_dim));
  }
  const bool regression = spec.family == LearnerFamily::kLinearRegression;
  if (regression != data.is_regression()) {
    throw std::invalid_argument("learner: model family does not match the dataset kind");
  }
  if (!regression && data.classes > spec.class_count) {
    throw std::invalid_argument("learner: dataset has more classes than the model");
  }
}

// Writes logits for sample x; `hidden` receives tanh activations for the MLP.
void forward(const LearnerSpec& spec, std::span<const double> w, const double* x,
             std::span<double> logits, std::span<double> hidden) {
  const int d = spec.input_dim;
  const int c = spec.class_count;
  if (spec.family == LearnerFamily::kSoftmaxRegression) {
    const double* bias = w.data() + static_cast<std::size_t>(c) * d;
    for (int j = 0; j < c; ++j) {
      const double* row = w.data() + static_cast<std::size_t>(j) * d;
      logits[j] = std::inner_product(x, x + d, row, bias[j]);
    }
    return;
  }
  const int h = spec.hidden_units;
  const double* w1 = w.data();
  const double* b1 = w1 + static_cast<std::size_t>(h) * d;
  const double* w2 = b1 + h;
  const double* b2 = w2 + static_cast<std::size_t>(c) * h;
  for (int u = 0; u < h; ++u) {
    hidden[u] = std::tanh(std::inner_product(x, x + d, w1 + static_cast<std::size_t>(u) * d, b1[u]));
  }
  for (int j = 0; j < c; ++j) {
    logits[j] = std::inner_product(hidden.begin(), hidden.end(),
                                   w2 + static_cast<std::size_t>(j) * h, b2[j]);
  }
}

// Softmax in place; returns log-sum-exp.
double softmax(std::span<double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : z) v /= total;
  return top + std::log(total);
}

}  // namespace

std::size_t LearnerSpec::parameter_count() const {
  const auto d = static_cast<std::size_t>(input_dim);
  const auto c = static_cast<std::size_t>(class_count);
  const auto h = static_cast<std::size_t>(hidden_units);
  switch (family) {
    case LearnerFamily::kLinearRegression:
      return d + 1;
    case LearnerFamily::kSoftmaxRegression:
      return c * (d + 1);
    case LearnerFamily::kMlp:
      return h * (d + 1) + c * (h + 1);
  }
  return 0;
}

void LearnerSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("learner: input_dim must be >= 1");
  if (family != LearnerFamily::kLinearRegression && class_count < 2) {
    throw std::invalid_argument("learner: classifiers need >= 2 classes");
  }
  if (family == LearnerFamily::kMlp && hidden_units < 1) {
    throw std::invalid_argument("learner: hidden_units must be >= 1");
  }
}

std::vector<double> initial_parameters(const LearnerSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<double> w(spec.parameter_count(), 0.0);
  if (spec.family == LearnerFamily::kMlp) {
    std::normal_distribution<double> first(0.0, 1.0 / std::sqrt(spec.input_dim));
    std::normal_distribution<double> second(0.0, 1.0 / std::sqrt(spec.hidden_units));
    const std::size_t layer1 = static_cast<std::size_t>(spec.hidden_units) * spec.input_dim;
    const std::size_t layer2_start = layer1 + static_cast<std::size_t>(spec.hidden_units);
    for (std::size_t i = 0; i < layer1; ++i) w[i] = first(rng);
    for (std::size_t i = 0; i < static_cast<std::size_t>(spec.class_count) * spec.hidden_units; ++i) {
      w[layer2_start + i] = second(rng);
    }
  }
  return w;
}

double loss_and_gradient(const LearnerSpec& spec, std::span<const double> w, const Dataset& data,
                         std::span<const std::size_t> indices, std::span<double> grad) {
  check_data(spec, w, data);
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != w.size()) {
    throw std::invalid_argument("learner: gradient buffer has the wrong length");
  }
  const std::size_t count = indices.empty() ? data.size() : indices.size();
  if (count == 0) throw std::invalid_argument("learner: empty sample set");
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

  const int d = spec.input_dim;
  const int c = spec.class_count;
  const int h = spec.hidden_units;
  std::vector<double> logits(static_cast<std::size_t>(c));
  std::vector<double> hidden(static_cast<std::size_t>(h));
  std::vector<double> back(static_cast<std::size_t>(h));
  double loss = 0.0;

  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t i = indices.empty() ? s : indices[s];
    const double* x = data.row(i);

    if (spec.family == LearnerFamily::kLinearRegression) {
      const double residual = std::inner_product(x, x + d, w.begin(), w[d]) - data.targets[i];
      loss += 0.5 * residual * residual;
      if (want_grad) {
        for (int j = 0; j < d; ++j) grad[j] += residual * x[j];
        grad[d] += residual;
      }
      continue;
    }

    forward(spec, w, x, logits, hidden);
    const int label = data.labels[i];
    const double z_label = logits[label];
    loss += softmax(logits) - z_label;
    if (!want_grad) continue;
    logits[label] -= 1.0;  // dL/dz

    if (spec.family == LearnerFamily::kSoftmaxRegression) {
      double* gb = grad.data() + static_cast<std::size_t>(c) * d;
      for (int j = 0; j < c; ++j) {
        double* row = grad.data() + static_cast<std::size_t>(j) * d;
        for (int t = 0; t < d; ++t) row[t] += logits[j] * x[t];
        gb[j] += logits[j];
      }
      continue;
    }

    const double* w2 = w.data() + static_cast<std::size_t>(h) * (d + 1);
    double* g1 = grad.data();
    double* gb1 = g1 + static_cast<std::size_t>(h) * d;
    double* g2 = gb1 + h;
    double* gb2 = g2 + static_cast<std::size_t>(c) * h;
    std::fill(back.begin(), back.end(), 0.0);
    for (int j = 0; j < c; ++j) {
      for (int u = 0; u < h; ++u) {
        g2[static_cast<std::size_t>(j) * h + u] += logits[j] * hidden[u];
        back[u] += logits[j] * w2[static_cast<std::size_t>(j) * h + u];
      }
      gb2[j] += logits[j];
    }
    for (int u = 0; u < h; ++u) {
      const double dz = back[u] * (1.0 - hidden[u] * hidden[u]);
      double* row = g1 + static_cast<std::size_t>(u) * d;
      for (int t = 0; t < d; ++t) row[t] += dz * x[t];
      gb1[u] += dz;
    }
  }

  const double inv = 1.0 / static_cast<double>(count);
  if (want_grad) {
    for (double& g : grad) g *= inv;
  }
  return loss * inv;
}

Evaluation evaluate(const LearnerSpec& spec, std::span<const double> w, const Dataset& data) {
  check_data(spec, w, data);
  if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  Evaluation out;
  out.loss = loss_and_gradient(spec, w, data, {}, {});
  if (spec.family == LearnerFamily::kLinearRegression) return out;

  std::vector<double> logits(static_cast<std::size_t>(spec.class_count));
  std::vector<double> hidden(static_cast<std::size_t>(spec.hidden_units));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(spec, w, data.row(i), logits, hidden);
    const auto best = std::max_element(logits.begin(), logits.end()) - logits.begin();
    if (best == data.labels[i]) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return out;
}

}  // namespace airfeel
