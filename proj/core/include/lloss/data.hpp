#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lloss/tensor.hpp"

namespace lloss {

enum class TaskKind { Classification, Regression };

std::string_view task_name(TaskKind task);

/// Ground truth for a batch: class indices or a [batch x D] regression target.
using Targets = std::variant<std::vector<int>, Tensor>;

struct Sample {
  Tensor x;  // [1 x input_dim]
  std::variant<int, std::vector<Real>> y;
  std::size_t id = 0;
};

enum class SplitTag { Pool, Test };

struct NormStats {
  std::vector<Real> mean;
  std::vector<Real> std;
};

/// Samples stored as rows; a sample's id is its row index.
struct Dataset {
  TaskKind task = TaskKind::Classification;
  SplitTag split = SplitTag::Pool;
  Tensor features;             // [n x input_dim]
  std::vector<int> labels;     // classification only
  Tensor targets;              // regression only, [n x D]
  std::size_t num_classes = 0; // classification only
  std::optional<NormStats> stats;

  std::size_t size() const { return features.empty() ? 0 : features.rows(); }
  std::size_t input_dim() const { return features.cols(); }
  std::size_t output_dim() const { return task == TaskKind::Classification ? num_classes : targets.cols(); }

  Tensor gather_features(std::span<const std::size_t> ids) const { return gather_rows(features, ids); }
  Targets gather_targets(std::span<const std::size_t> ids) const;
  Targets all_targets() const;
  Sample sample(std::size_t id) const;
};

struct DatasetSplit {
  Dataset pool;
  Dataset test;
};

enum class SynthKind { GaussianMixture, SineRegression };

struct SynthConfig {
  SynthKind kind = SynthKind::GaussianMixture;
  std::size_t num_classes = 4;  // gaussian_mixture
  std::size_t input_dim = 2;    // gaussian_mixture; dims beyond 2 carry pure noise
  std::size_t output_dim = 1;   // sine_regression
  std::size_t pool_size = 2000;
  std::size_t test_size = 500;
  Real noise = Real{0.5};
  Real radius = Real{2};       // mixture means lie on a circle of this radius
  Real interval = Real{3};     // sine inputs are uniform on [-interval, interval]
  Real frequency = Real{1};
  bool heteroscedastic = true; // sine noise std grows linearly with |x|
  std::uint64_t seed = 0;

  /// All violated constraints; empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;
};

DatasetSplit gen_gaussian_mixture(const SynthConfig& cfg, Rng& rng);
DatasetSplit gen_sine_regression(const SynthConfig& cfg, Rng& rng);
/// Dispatches on cfg.kind using an engine seeded from cfg.seed.
DatasetSplit generate(const SynthConfig& cfg);

inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr std::size_t kCifarPixels = 3072;

/// Parses the CIFAR-10 binary layout: per record one label byte then 3072
/// channel-planar pixel bytes. Pixels are scaled to [0, 1].
Dataset load_cifar10(const std::filesystem::path& path);
Dataset parse_cifar10(std::span<const std::uint8_t> bytes);
/// Inverse of parse_cifar10 for datasets whose pixels are multiples of 1/255.
std::vector<std::uint8_t> encode_cifar10(const Dataset& dataset);
void write_cifar10(const std::filesystem::path& path, const Dataset& dataset);

/// Loads data_batch_*.bin as the pool and test_batch.bin as the test split
/// from `dir`, then subsamples each uniformly without replacement.
DatasetSplit load_cifar10_split(const std::filesystem::path& dir, std::size_t pool_size, std::size_t test_size,
                                Rng& rng);

/// Per-dimension standardization using pool statistics for both splits.
/// Constant dimensions are centered only.
void normalize(DatasetSplit& split);

void export_csv(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace lloss
