// In-memory datasets, synthetic generators, device partitions and an IDX
// reader.
#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "airfeel/random.hpp"

namespace airfeel {

/// Row-major feature matrix with either class labels or real targets.
struct Dataset {
  int feature_dim = 0;
  int classes = 0;  // 0 for regression data
  std::vector<double> features;
  std::vector<int> labels;
  std::vector<double> targets;

  std::size_t size() const;
  const double* row(std::size_t i) const { return features.data() + i * feature_dim; }
  bool is_regression() const { return classes == 0; }

  /// Copy restricted to the first `count` samples.
  Dataset head(std::size_t count) const;
};

struct SplitDataset {
  Dataset train;
  Dataset test;
};

/// Isotropic unit-variance Gaussian clusters whose means are pairwise
/// `separation` apart, split 80/20 per class into train and test.
SplitDataset make_synthetic_dataset(int classes, int feature_dim, int samples_per_class,
                                    double separation, Rng& rng);

/// y = <w*, x> + b* + noise with standard normal x; 80/20 split.
SplitDataset make_regression_dataset(int samples, int feature_dim, double noise_stddev, Rng& rng);

enum class PartitionMode { kIid, kLabelSkew };

struct DataPartition {
  PartitionMode mode = PartitionMode::kIid;
  std::vector<std::vector<std::size_t>> shards;

  bool equal_sizes() const;
};

/// iid: shuffle, then split into K contiguous blocks. label-skew: sort by
/// label (ties in shuffled order), cut into K * shards_per_device shards and
/// deal them to devices in a shuffled order. With require_equal the dataset
/// size must be divisible by the number of pieces.
DataPartition partition(const Dataset& data, int devices, PartitionMode mode, Rng& rng,
                        bool require_equal, int shards_per_device = 2);

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801);
/// pixels scaled to [0, 1].
Dataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Loads train-images-idx3-ubyte / train-labels-idx1-ubyte and the t10k
/// counterparts from `dir`.
SplitDataset load_idx_directory(const std::filesystem::path& dir);

}  // namespace airfeel
