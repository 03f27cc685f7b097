#include "airfeel/fel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace airfeel {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double clip(double g, double bound) { return std::clamp(g, -bound, bound); }

PowerScaling scaling_for(const TrainOptions& opts, const DataPartition& parts, int frame,
                         double delta_g) {
  std::vector<std::int64_t> sizes;
  for (const auto& shard : parts.shards) sizes.push_back(static_cast<std::int64_t>(shard.size()));
  switch (opts.mode) {
    case AggregationMode::kIdeal:
      return PowerScaling{1.0, sizes};
    case AggregationMode::kAnalogFading:
      return select_beta(sizes, frame, delta_g * delta_g, opts.system.p_max, opts.beta_margin);
    case AggregationMode::kAwgn:
    case AggregationMode::kFading:
      break;
  }
  return select_beta(sizes, frame, qam_peak_energy(opts.system.order), opts.system.p_max,
                     opts.beta_margin);
}

struct Setup {
  DataPartition parts;
  std::vector<double> w0;
};

Setup prepare(const TrainOptions& opts, const SplitDataset& data) {
  opts.learner.validate();
  opts.system.validate();
  if (opts.rounds < 0) throw std::invalid_argument("train: rounds must be >= 0");
  if (!(opts.eta > 0.0)) throw std::invalid_argument("train: eta must be positive");
  if (opts.local_epochs < 0) throw std::invalid_argument("train: local_epochs must be >= 0");
  Rng part_rng = derive_stream(opts.seed, {opts.experiment, opts.trial, kSetupRound, kSetupPartition});
  Rng init_rng = derive_stream(opts.seed, {opts.experiment, opts.trial, kSetupRound, kSetupInit});
  Setup out;
  out.parts = partition(data.train, opts.system.devices, opts.data_mode, part_rng,
                        is_digital(opts.mode), opts.shards_per_device);
  out.w0 = initial_parameters(opts.learner, init_rng);
  return out;
}

std::vector<std::vector<double>> device_gradients(const TrainOptions& opts,
                                                  const SplitDataset& data,
                                                  const DataPartition& parts,
                                                  std::span<const double> w, int round) {
  std::vector<std::vector<double>> grads;
  grads.reserve(parts.shards.size());
  for (std::size_t k = 0; k < parts.shards.size(); ++k) {
    Rng rng = derive_stream(opts.seed, {opts.experiment, opts.trial, static_cast<std::uint64_t>(round),
                                        kDeviceStreamBase + k});
    grads.push_back(local_gradient(opts.learner, w, data.train, parts.shards[k], opts.batch_size,
                                   opts.local_epochs, opts.eta, rng));
  }
  return grads;
}

}  // namespace

bool is_digital(AggregationMode mode) {
  return mode == AggregationMode::kAwgn || mode == AggregationMode::kFading;
}

std::vector<double> local_gradient(const LearnerSpec& spec, std::span<const double> w,
                                   const Dataset& data, std::span<const std::size_t> shard,
                                   int batch_size, int local_epochs, double eta, Rng& rng) {
  if (shard.empty()) throw std::invalid_argument("local_gradient: empty shard");
  std::vector<double> grad(w.size());
  const bool full = batch_size <= 0 || static_cast<std::size_t>(batch_size) >= shard.size();

  if (local_epochs == 0) {
    if (full) {
      loss_and_gradient(spec, w, data, shard, grad);
      return grad;
    }
    std::vector<std::size_t> pool(shard.begin(), shard.end());
    for (int i = 0; i < batch_size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
    }
    loss_and_gradient(spec, w, data, std::span(pool).first(static_cast<std::size_t>(batch_size)),
                      grad);
    return grad;
  }

  if (!(eta > 0.0)) throw std::invalid_argument("local_gradient: eta must be positive");
  std::vector<double> local(w.begin(), w.end());
  std::vector<std::size_t> order(shard.begin(), shard.end());
  const std::size_t batch = full ? order.size() : static_cast<std::size_t>(batch_size);
  for (int epoch = 0; epoch < local_epochs; ++epoch) {
    if (!full) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      loss_and_gradient(spec, local, data, std::span(order).subspan(start, len), grad);
      for (std::size_t i = 0; i < local.size(); ++i) local[i] -= eta * grad[i];
    }
  }
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = (w[i] - local[i]) / eta;
  return grad;
}

AggregateResult aggregate(std::span<const std::vector<double>> gradients, AggregationMode mode,
                          const SystemConfig& cfg, const codec::QuantizerSpec& spec,
                          const PowerScaling& scaling, const ChannelStreams& streams) {
  const std::size_t k = gradients.size();
  if (k == 0) throw std::invalid_argument("aggregate: no device gradients");
  if (static_cast<int>(k) != cfg.devices) {
    throw std::invalid_argument("aggregate: got " + std::to_string(k) + " gradients for K = " +
                                std::to_string(cfg.devices));
  }
  if (scaling.dataset_sizes.size() != k) {
    throw std::invalid_argument("aggregate: dataset sizes do not match the device count");
  }
  const std::size_t n = gradients.front().size();
  for (const auto& g : gradients) {
    if (g.size() != n) throw std::invalid_argument("aggregate: gradient lengths differ");
  }
  if (is_digital(mode) && !scaling.equal_sizes()) {
    throw std::invalid_argument("aggregate: digital aggregation requires equal dataset sizes");
  }

  AggregateResult out;
  const double total = static_cast<double>(scaling.total_size());
  out.ideal.assign(n, 0.0);
  for (std::size_t d = 0; d < k; ++d) {
    const double weight = static_cast<double>(scaling.dataset_sizes[d]) / total;
    for (std::size_t i = 0; i < n; ++i) out.ideal[i] += weight * gradients[d][i];
  }
  if (mode == AggregationMode::kIdeal) {
    out.quantized = out.ideal;
    out.estimate = out.ideal;
    return out;
  }

  out.quantized.resize(n);
  out.estimate.resize(n);
  const int kk = static_cast<int>(k);
  const double lattice_gain = static_cast<double>(kk);
  CVector symbols(k);
  ChannelRealization channel(cfg.devices, cfg.antennas);
  std::vector<int> levels(k);

  for (std::size_t i = 0; i < n; ++i) {
    StreamLabels labels = streams.base;
    labels.subchannel = i;
    Rng rng = derive_stream(streams.seed, labels);

    double noiseless = 0.0;
    std::int64_t true_sum = 0;
    for (std::size_t d = 0; d < k; ++d) {
      const std::int64_t size = scaling.dataset_sizes[d];
      if (mode == AggregationMode::kAnalogFading) {
        const double x = clip(gradients[d][i], spec.delta_g());
        noiseless += static_cast<double>(size) / total * x;
        symbols[d] = preprocess(cplx{x, 0.0}, size, scaling);
      } else {
        levels[d] = codec::quantize(gradients[d][i], spec);
        true_sum += levels[d];
        symbols[d] = preprocess(codec::encode(levels[d], spec.levels()).value(), size, scaling);
      }
    }

    cplx s_hat;
    if (mode == AggregationMode::kAwgn) {
      s_hat = transmit_awgn(symbols, cfg, rng);
    } else {
      resample_channel(cfg, rng, channel);
      s_hat = combine(sum_beamformer(channel, cfg), apply_mac(symbols, channel));
    }
    const cplx r = postprocess(s_hat, scaling);

    if (mode == AggregationMode::kAnalogFading) {
      out.quantized[i] = noiseless;
      out.estimate[i] = r.real();
      continue;
    }
    const codec::LevelSum decoded = codec::decode_sum(r * lattice_gain, kk, spec.levels());
    if (decoded.value != true_sum) ++out.symbol_errors;
    out.quantized[i] = codec::dequantize(codec::AverageLevel{true_sum, kk}, spec);
    out.estimate[i] = codec::dequantize(codec::AverageLevel{decoded.value, kk}, spec);
  }

  out.grad_mse = squared_distance(out.ideal, out.estimate);
  out.quant_mse = squared_distance(out.ideal, out.quantized);
  out.channel_mse = squared_distance(out.quantized, out.estimate);
  return out;
}

double calibrate_delta_g(const TrainOptions& opts, const SplitDataset& data) {
  TrainOptions dry = opts;
  dry.mode = AggregationMode::kIdeal;
  const Setup setup = prepare(dry, data);
  std::vector<double> w = setup.w0;
  double peak = 0.0;
  for (int m = 1; m <= dry.rounds; ++m) {
    const auto grads = device_gradients(dry, data, setup.parts, w, m);
    std::vector<double> avg(w.size(), 0.0);
    for (const auto& g : grads) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        peak = std::max(peak, std::abs(g[i]));
        avg[i] += g[i] / static_cast<double>(grads.size());
      }
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= dry.eta * avg[i];
  }
  return peak > 0.0 ? peak : 1.0;
}

TrainResult train(const TrainOptions& opts, const SplitDataset& data) {
  const Setup setup = prepare(opts, data);
  const std::size_t n = opts.learner.parameter_count();
  const int frame = opts.frame_size > 0 ? std::min<int>(opts.frame_size, static_cast<int>(n))
                                        : static_cast<int>(n);

  TrainResult result;
  result.delta_g = opts.mode == AggregationMode::kIdeal ? std::max(opts.delta_g, 1.0)
                   : opts.delta_g > 0.0                 ? opts.delta_g
                                                        : calibrate_delta_g(opts, data);
  const PowerScaling scaling = scaling_for(opts, setup.parts, frame, result.delta_g);
  result.beta = scaling.beta;
  const codec::QuantizerSpec spec(opts.system.order, result.delta_g);
  SystemConfig cfg = opts.system;
  cfg.subchannels = frame;

  std::vector<double> w = setup.w0;
  result.initial_w = w;
  result.initial_loss = evaluate(opts.learner, w, data.train).loss;
  for (int m = 1; m <= opts.rounds; ++m) {
    const auto grads = device_gradients(opts, data, setup.parts, w, m);
    const ChannelStreams streams{opts.seed, {opts.experiment, opts.trial,
                                             static_cast<std::uint64_t>(m), 0}};
    const AggregateResult agg = aggregate(grads, opts.mode, cfg, spec, scaling, streams);

    RoundMetrics metrics;
    metrics.round = m;
    metrics.grad_mse = agg.grad_mse;
    metrics.quant_mse = agg.quant_mse;
    metrics.channel_mse = agg.channel_mse;
    metrics.grad_norm2 = std::inner_product(agg.ideal.begin(), agg.ideal.end(), agg.ideal.begin(), 0.0);
    for (const auto& g : grads) metrics.divergence += squared_distance(g, agg.ideal);
    metrics.divergence /= static_cast<double>(grads.size());

    for (std::size_t i = 0; i < n; ++i) w[i] -= opts.eta * agg.estimate[i];
    metrics.train_loss = evaluate(opts.learner, w, data.train).loss;
    const Evaluation test = evaluate(opts.learner, w, data.test);
    metrics.test_loss = test.loss;
    metrics.test_accuracy = test.accuracy;
    result.rounds.push_back(metrics);
  }
  result.final_w = std::move(w);
  return result;
}

}  // namespace airfeel
