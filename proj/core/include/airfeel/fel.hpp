// Federated edge learning loop: local gradients, over-the-air aggregation
// and global SGD updates.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "airfeel/airchannel.hpp"
#include "airfeel/codec.hpp"
#include "airfeel/dataset.hpp"
#include "airfeel/learner.hpp"
#include "airfeel/powerctl.hpp"
#include "airfeel/random.hpp"

namespace airfeel {

enum class AggregationMode { kIdeal, kAwgn, kFading, kAnalogFading };

bool is_digital(AggregationMode mode);

// Subchannel labels at or above this value address per-device streams.
inline constexpr std::uint64_t kDeviceStreamBase = std::uint64_t{1} << 40;
// Round label reserved for one-off setup draws (data, partition, init).
inline constexpr std::uint64_t kSetupRound = ~std::uint64_t{0};
inline constexpr std::uint64_t kSetupData = 0;
inline constexpr std::uint64_t kSetupPartition = 1;
inline constexpr std::uint64_t kSetupInit = 2;

/// Where the per-subchannel channel streams come from: subchannel n of the
/// aggregate draws from derive_stream(seed, base with subchannel = n).
struct ChannelStreams {
  std::uint64_t seed = 0;
  StreamLabels base;
};

struct AggregateResult {
  std::vector<double> ideal;      // sum_k |D_k| g_k / sum_k |D_k|
  std::vector<double> quantized;  // noiseless output of the selected scheme
  std::vector<double> estimate;   // g_hat
  double grad_mse = 0.0;          // ||ideal - estimate||^2
  double quant_mse = 0.0;         // ||ideal - quantized||^2
  double channel_mse = 0.0;       // ||quantized - estimate||^2
  std::int64_t symbol_errors = 0; // digital subchannels whose decoded sum is wrong
};

/// Effective gradient of one device. local_epochs = 0 returns the gradient
/// over the shard (or over one random mini-batch when 0 < batch_size <
/// shard size); local_epochs >= 1 runs that many mini-batch SGD epochs and
/// returns (w_start - w_end) / eta.
std::vector<double> local_gradient(const LearnerSpec& spec, std::span<const double> w,
                                   const Dataset& data, std::span<const std::size_t> shard,
                                   int batch_size, int local_epochs, double eta, Rng& rng);

/// Aggregates one round of device gradients through the selected pipeline.
/// `scaling.dataset_sizes` supplies |D_k|; digital modes require them equal.
AggregateResult aggregate(std::span<const std::vector<double>> gradients, AggregationMode mode,
                          const SystemConfig& cfg, const codec::QuantizerSpec& spec,
                          const PowerScaling& scaling, const ChannelStreams& streams);

struct TrainOptions {
  LearnerSpec learner;
  AggregationMode mode = AggregationMode::kIdeal;
  SystemConfig system;   // subchannels is derived from the model size
  double delta_g = 0.0;  // <= 0 calibrates from an error-free run
  double beta_margin = kDefaultBetaMargin;
  int batch_size = 0;  // <= 0 means the full shard
  int local_epochs = 0;
  double eta = 0.1;
  int rounds = 100;
  int frame_size = 0;  // <= 0 sends all N parameters in one frame
  PartitionMode data_mode = PartitionMode::kIid;
  int shards_per_device = 2;
  std::uint64_t seed = 1;
  std::uint64_t experiment = 0;
  std::uint64_t trial = 0;
};

struct RoundMetrics {
  int round = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double grad_mse = 0.0;
  double grad_norm2 = 0.0;  // ||ideal aggregate||^2 at the pre-update model
  double quant_mse = 0.0;
  double channel_mse = 0.0;
  double divergence = 0.0;  // mean_k ||g_k - ideal||^2
};

struct TrainResult {
  std::vector<RoundMetrics> rounds;
  std::vector<double> initial_w;
  std::vector<double> final_w;
  double initial_loss = 0.0;
  double delta_g = 0.0;
  double beta = 1.0;
};

/// Largest |g_k^n| seen over an error-free run with the same options, or 1
/// when every gradient entry is zero.
double calibrate_delta_g(const TrainOptions& opts, const SplitDataset& data);

TrainResult train(const TrainOptions& opts, const SplitDataset& data);

}  // namespace airfeel
