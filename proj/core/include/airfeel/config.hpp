// Flat `key = value` experiment description shared by every CLI command.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "airfeel/airchannel.hpp"
#include "airfeel/dataset.hpp"
#include "airfeel/fel.hpp"
#include "airfeel/learner.hpp"

namespace airfeel {

/// Parse or validation failure; line is 0 when the key was not in the text.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& message);

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

enum class SweepTarget { kGradient, kSymbolSum };
enum class DatasetKind { kSynthetic, kRegression, kIdx };

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int trials = 100;
  unsigned threads = 0;  // 0 = hardware concurrency

  SystemConfig system;  // K, N, Nr, q, sigma_h2, sigma_z2, p_max, channel_dist
  double delta_g = 0.0;  // <= 0 derives a default per command
  AggregationMode aggregator = AggregationMode::kFading;
  double beta_margin = 1.1;

  LearnerFamily model = LearnerFamily::kSoftmaxRegression;
  int hidden = 16;
  DatasetKind dataset = DatasetKind::kSynthetic;
  int classes = 3;
  int feature_dim = 20;
  int samples_per_device = 100;
  double separation = 4.0;
  double noise_stddev = 0.1;
  PartitionMode data_mode = PartitionMode::kIid;
  int shards_per_device = 2;
  int batch = 0;
  int local_epochs = 0;
  double eta = 0.1;
  int rounds = 100;
  int frame_size = 0;

  SweepTarget sweep_target = SweepTarget::kGradient;
  double value_low = -2.0;
  double value_high = 2.0;
  std::vector<int> nr_list;
  std::vector<double> snr_db_list;
  std::vector<int> q_list;
  std::vector<int> k_list;

  double symbol_amplitude = 1.0;
  double epsilon = 1.0;
  double delta = 0.01;
  double smoothness = 1.0;
  double loss_gap = 1.0;
  double theta_bar = 0.0;

  double bandwidth = 1000.0;
  double symbol_time = 1e-3;
  double model_size = 0.0;  // <= 0 uses N
  double symbol_m1 = 0.5;
  double symbol_m2 = 1.0 / 3.0;

  std::string output;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError naming the key and line on unknown keys, malformed
/// values and violated constraints.
ExperimentConfig parse_config(std::string_view text);

/// Parses the file at `path`; I/O failures raise ConfigError with key "file".
ExperimentConfig load_config(const std::string& path);

/// Text that parse_config maps back to an equal configuration.
std::string render_config(const ExperimentConfig& cfg);

/// Checks every value constraint; errors carry line 0.
void validate_config(const ExperimentConfig& cfg);

/// Documented key list, one `key = default  # description` line per key.
std::string config_reference();

const char* to_string(AggregationMode mode);
const char* to_string(LearnerFamily family);
const char* to_string(PartitionMode mode);
const char* to_string(ChannelLaw law);
const char* to_string(SweepTarget target);
const char* to_string(DatasetKind kind);

}  // namespace airfeel
