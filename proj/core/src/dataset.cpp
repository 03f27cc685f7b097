#include "airfeel/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace airfeel {

namespace {

void append_row(Dataset& dst, const Dataset& src, std::size_t i) {
  dst.features.insert(dst.features.end(), src.row(i), src.row(i) + src.feature_dim);
  if (src.is_regression()) {
    dst.targets.push_back(src.targets[i]);
  } else {
    dst.labels.push_back(src.labels[i]);
  }
}

Dataset empty_like(const Dataset& src) {
  Dataset out;
  out.feature_dim = src.feature_dim;
  out.classes = src.classes;
  return out;
}

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw std::runtime_error("IDX: truncated header in " + path.string());
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

}  // namespace

std::size_t Dataset::size() const {
  return feature_dim > 0 ? features.size() / static_cast<std::size_t>(feature_dim) : 0;
}

Dataset Dataset::head(std::size_t count) const {
  if (count > size()) throw std::out_of_range("Dataset::head: not enough samples");
  Dataset out = empty_like(*this);
  for (std::size_t i = 0; i < count; ++i) append_row(out, *this, i);
  return out;
}

SplitDataset make_synthetic_dataset(int classes, int feature_dim, int samples_per_class,
                                    double separation, Rng& rng) {
  if (classes < 2 || feature_dim < 1 || samples_per_class < 1) {
    throw std::invalid_argument("synthetic dataset: need >= 2 classes and positive sizes");
  }
  if (classes > feature_dim) {
    throw std::invalid_argument("synthetic dataset: classes must not exceed feature_dim");
  }
  if (separation < 0.0) throw std::invalid_argument("synthetic dataset: separation < 0");

  // Means c * e_c / sqrt(2) sit pairwise `separation` apart.
  const double offset = separation / std::sqrt(2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int train_per_class = (samples_per_class * 4) / 5;

  SplitDataset out;
  out.train.feature_dim = out.test.feature_dim = feature_dim;
  out.train.classes = out.test.classes = classes;
  Dataset all = empty_like(out.train);
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < samples_per_class; ++i) {
      for (int d = 0; d < feature_dim; ++d) {
        all.features.push_back(normal(rng) + (d == c ? offset : 0.0));
      }
      all.labels.push_back(c);
    }
  }
  for (int c = 0; c < classes; ++c) {
    const std::size_t base = static_cast<std::size_t>(c) * samples_per_class;
    for (int i = 0; i < samples_per_class; ++i) {
      append_row(i < train_per_class ? out.train : out.test, all, base + i);
    }
  }

  // Interleave classes so that prefixes stay balanced.
  std::vector<std::size_t> order(out.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Dataset shuffled = empty_like(out.train);
  for (std::size_t i : order) append_row(shuffled, out.train, i);
  out.train = std::move(shuffled);
  return out;
}

SplitDataset make_regression_dataset(int samples, int feature_dim, double noise_stddev, Rng& rng) {
  if (samples < 5 || feature_dim < 1) {
    throw std::invalid_argument("regression dataset: need >= 5 samples and feature_dim >= 1");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w_star(static_cast<std::size_t>(feature_dim) + 1);
  for (double& v : w_star) v = normal(rng);

  const int train_count = (samples * 4) / 5;
  SplitDataset out;
  out.train.feature_dim = out.test.feature_dim = feature_dim;
  for (int i = 0; i < samples; ++i) {
    Dataset& dst = i < train_count ? out.train : out.test;
    double y = w_star.back();
    for (int d = 0; d < feature_dim; ++d) {
      const double x = normal(rng);
      dst.features.push_back(x);
      y += w_star[static_cast<std::size_t>(d)] * x;
    }
    dst.targets.push_back(y + noise_stddev * normal(rng));
  }
  return out;
}

bool DataPartition::equal_sizes() const {
  return std::adjacent_find(shards.begin(), shards.end(), [](const auto& a, const auto& b) {
           return a.size() != b.size();
         }) == shards.end();
}

DataPartition partition(const Dataset& data, int devices, PartitionMode mode, Rng& rng,
                        bool require_equal, int shards_per_device) {
  if (devices < 1) throw std::invalid_argument("partition: K must be >= 1");
  if (shards_per_device < 1) throw std::invalid_argument("partition: shards per device >= 1");
  const std::size_t n = data.size();
  const std::size_t pieces =
      static_cast<std::size_t>(devices) * (mode == PartitionMode::kLabelSkew ? shards_per_device : 1);
  if (n < pieces) throw std::invalid_argument("partition: fewer samples than shards");
  if (require_equal && n % pieces != 0) {
    throw std::invalid_argument("partition: " + std::to_string(n) +
                                " samples cannot be split evenly into " + std::to_string(pieces) +
                                " pieces");
  }
  if (mode == PartitionMode::kLabelSkew && data.is_regression()) {
    throw std::invalid_argument("partition: label-skew requires labelled data");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  if (mode == PartitionMode::kLabelSkew) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data.labels[a] < data.labels[b]; });
  }

  // Piece p covers [p * n / pieces, (p + 1) * n / pieces).
  std::vector<std::vector<std::size_t>> chunks(pieces);
  for (std::size_t p = 0; p < pieces; ++p) {
    chunks[p].assign(order.begin() + static_cast<std::ptrdiff_t>(p * n / pieces),
                     order.begin() + static_cast<std::ptrdiff_t>((p + 1) * n / pieces));
  }

  DataPartition out;
  out.mode = mode;
  out.shards.resize(static_cast<std::size_t>(devices));
  if (mode == PartitionMode::kIid) {
    for (std::size_t k = 0; k < chunks.size(); ++k) out.shards[k] = std::move(chunks[k]);
    return out;
  }
  std::vector<std::size_t> deal(pieces);
  std::iota(deal.begin(), deal.end(), 0);
  std::shuffle(deal.begin(), deal.end(), rng);
  for (std::size_t p = 0; p < pieces; ++p) {
    auto& shard = out.shards[p / static_cast<std::size_t>(shards_per_device)];
    const auto& chunk = chunks[deal[p]];
    shard.insert(shard.end(), chunk.begin(), chunk.end());
  }
  return out;
}

Dataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw std::runtime_error("IDX: cannot open " + images.string());
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw std::runtime_error("IDX: cannot open " + labels.string());

  if (read_be32(img, images) != 0x00000803u) {
    throw std::runtime_error("IDX: bad image magic in " + images.string());
  }
  if (read_be32(lab, labels) != 0x00000801u) {
    throw std::runtime_error("IDX: bad label magic in " + labels.string());
  }
  const std::uint32_t count = read_be32(img, images);
  const std::uint32_t rows = read_be32(img, images);
  const std::uint32_t cols = read_be32(img, images);
  if (read_be32(lab, labels) != count) {
    throw std::runtime_error("IDX: image and label counts differ");
  }

  Dataset out;
  out.feature_dim = static_cast<int>(rows * cols);
  std::vector<unsigned char> pixels(static_cast<std::size_t>(count) * rows * cols);
  img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!img) throw std::runtime_error("IDX: truncated image data in " + images.string());
  std::vector<unsigned char> raw_labels(count);
  lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(count));
  if (!lab) throw std::runtime_error("IDX: truncated label data in " + labels.string());

  out.features.reserve(pixels.size());
  for (unsigned char p : pixels) out.features.push_back(p / 255.0);
  int max_label = 0;
  for (unsigned char l : raw_labels) {
    out.labels.push_back(l);
    max_label = std::max<int>(max_label, l);
  }
  out.classes = max_label + 1;
  return out;
}

SplitDataset load_idx_directory(const std::filesystem::path& dir) {
  SplitDataset out;
  out.train = read_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  out.test = read_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
  const int classes = std::max(out.train.classes, out.test.classes);
  out.train.classes = out.test.classes = classes;
  if (out.train.feature_dim != out.test.feature_dim) {
    throw std::runtime_error("IDX: train and test image sizes differ");
  }
  return out;
}

}  // namespace airfeel
