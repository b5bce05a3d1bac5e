#include "lloss/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

namespace lloss {

std::string_view task_name(TaskKind task) {
  return task == TaskKind::Classification ? "classification" : "regression";
}

Targets Dataset::gather_targets(std::span<const std::size_t> ids) const {
  if (task == TaskKind::Regression) return gather_rows(targets, ids);
  std::vector<int> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(labels.at(id));
  return out;
}

Targets Dataset::all_targets() const {
  if (task == TaskKind::Regression) return targets;
  return labels;
}

Sample Dataset::sample(std::size_t id) const {
  const std::size_t ids[] = {id};
  Sample s{gather_features(ids), 0, id};
  if (task == TaskKind::Classification) {
    s.y = labels.at(id);
  } else {
    auto row = targets.row(id);
    s.y = std::vector<Real>(row.begin(), row.end());
  }
  return s;
}

std::vector<std::string> SynthConfig::violations() const {
  std::vector<std::string> out;
  if (pool_size == 0) out.emplace_back("pool_size must be positive");
  if (test_size == 0) out.emplace_back("test_size must be positive");
  if (!(noise >= 0)) out.emplace_back("noise must be nonnegative");
  if (kind == SynthKind::GaussianMixture) {
    if (num_classes < 2) out.emplace_back("num_classes must be at least 2");
    if (input_dim < 2) out.emplace_back("input_dim must be at least 2");
    if (!(radius > 0)) out.emplace_back("radius must be positive");
  } else {
    if (output_dim < 1) out.emplace_back("output_dim must be at least 1");
    if (!(interval > 0)) out.emplace_back("interval must be positive");
    if (!(frequency > 0)) out.emplace_back("frequency must be positive");
  }
  return out;
}

void SynthConfig::validate() const {
  auto v = violations();
  if (!v.empty()) throw ValueError("invalid synthetic dataset config: " + v.front());
}

namespace {

Dataset mixture_split(const SynthConfig& cfg, std::size_t n, SplitTag tag, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.task = TaskKind::Classification;
  d.split = tag;
  d.num_classes = cfg.num_classes;
  d.features = Tensor({n, cfg.input_dim});
  d.labels.resize(n);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % cfg.num_classes;
    const double angle = two_pi * static_cast<double>(c) / static_cast<double>(cfg.num_classes);
    auto row = d.features.row(i);
    row[0] = static_cast<Real>(cfg.radius * std::cos(angle));
    row[1] = static_cast<Real>(cfg.radius * std::sin(angle));
    for (std::size_t k = 0; k < cfg.input_dim; ++k) row[k] += static_cast<Real>(cfg.noise * normal(rng));
    d.labels[i] = static_cast<int>(c);
  }
  return d;
}

Dataset sine_split(const SynthConfig& cfg, std::size_t n, SplitTag tag, Rng& rng) {
  std::uniform_real_distribution<double> uniform(-cfg.interval, cfg.interval);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.task = TaskKind::Regression;
  d.split = tag;
  d.features = Tensor({n, 1});
  d.targets = Tensor({n, cfg.output_dim});
  for (std::size_t i = 0; i < n; ++i) {
    const double x = uniform(rng);
    const double sigma = cfg.heteroscedastic ? cfg.noise * std::abs(x) / cfg.interval : cfg.noise;
    d.features(i, 0) = static_cast<Real>(x);
    for (std::size_t k = 0; k < cfg.output_dim; ++k) {
      const double omega = cfg.frequency * static_cast<double>(k + 1);
      d.targets(i, k) = static_cast<Real>(std::sin(omega * x) + sigma * normal(rng));
    }
  }
  return d;
}

}  // namespace

DatasetSplit gen_gaussian_mixture(const SynthConfig& cfg, Rng& rng) {
  if (cfg.kind != SynthKind::GaussianMixture) throw ValueError("gen_gaussian_mixture: config kind mismatch");
  cfg.validate();
  DatasetSplit split;
  split.pool = mixture_split(cfg, cfg.pool_size, SplitTag::Pool, rng);
  split.test = mixture_split(cfg, cfg.test_size, SplitTag::Test, rng);
  return split;
}

DatasetSplit gen_sine_regression(const SynthConfig& cfg, Rng& rng) {
  if (cfg.kind != SynthKind::SineRegression) throw ValueError("gen_sine_regression: config kind mismatch");
  cfg.validate();
  DatasetSplit split;
  split.pool = sine_split(cfg, cfg.pool_size, SplitTag::Pool, rng);
  split.test = sine_split(cfg, cfg.test_size, SplitTag::Test, rng);
  return split;
}

DatasetSplit generate(const SynthConfig& cfg) {
  Rng rng(cfg.seed);
  return cfg.kind == SynthKind::GaussianMixture ? gen_gaussian_mixture(cfg, rng) : gen_sine_regression(cfg, rng);
}

Dataset parse_cifar10(std::span<const std::uint8_t> bytes) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError("CIFAR-10 data size " + std::to_string(bytes.size()) + " is not a positive multiple of " +
                      std::to_string(kCifarRecordBytes));
  }
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  Dataset d;
  d.task = TaskKind::Classification;
  d.num_classes = 10;
  d.features = Tensor({n, kCifarPixels});
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * kCifarRecordBytes;
    if (rec[0] > 9) {
      throw FormatError("CIFAR-10 record " + std::to_string(i) + " has label byte " + std::to_string(rec[0]));
    }
    d.labels[i] = rec[0];
    auto row = d.features.row(i);
    for (std::size_t p = 0; p < kCifarPixels; ++p) row[p] = static_cast<Real>(rec[1 + p]) / Real{255};
  }
  return d;
}

Dataset load_cifar10(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open CIFAR-10 file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_cifar10(bytes);
}

std::vector<std::uint8_t> encode_cifar10(const Dataset& dataset) {
  if (dataset.task != TaskKind::Classification || dataset.input_dim() != kCifarPixels) {
    throw FormatError("dataset is not in CIFAR-10 layout");
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(dataset.size() * kCifarRecordBytes);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int label = dataset.labels[i];
    if (label < 0 || label > 9) throw FormatError("label out of CIFAR-10 range");
    bytes.push_back(static_cast<std::uint8_t>(label));
    for (Real v : dataset.features.row(i)) {
      const long q = std::lround(static_cast<double>(v) * 255.0);
      if (q < 0 || q > 255) throw FormatError("pixel value outside [0, 1]");
      bytes.push_back(static_cast<std::uint8_t>(q));
    }
  }
  return bytes;
}

void write_cifar10(const std::filesystem::path& path, const Dataset& dataset) {
  const auto bytes = encode_cifar10(dataset);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

namespace {

Dataset concat_datasets(const std::vector<Dataset>& parts) {
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  Dataset d;
  d.task = TaskKind::Classification;
  d.num_classes = 10;
  d.features = Tensor({n, kCifarPixels});
  std::size_t at = 0;
  for (const auto& p : parts) {
    std::copy(p.features.values().begin(), p.features.values().end(),
              d.features.values().begin() + static_cast<std::ptrdiff_t>(at * kCifarPixels));
    d.labels.insert(d.labels.end(), p.labels.begin(), p.labels.end());
    at += p.size();
  }
  return d;
}

Dataset subsample(const Dataset& src, std::size_t n, SplitTag tag, Rng& rng) {
  std::vector<std::size_t> ids(src.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  if (n == 0 || n > ids.size()) {
    throw ValueError("cannot subsample " + std::to_string(n) + " of " + std::to_string(ids.size()) + " records");
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(n);
  std::sort(ids.begin(), ids.end());
  Dataset d;
  d.task = TaskKind::Classification;
  d.split = tag;
  d.num_classes = 10;
  d.features = src.gather_features(ids);
  for (auto id : ids) d.labels.push_back(src.labels[id]);
  return d;
}

}  // namespace

DatasetSplit load_cifar10_split(const std::filesystem::path& dir, std::size_t pool_size, std::size_t test_size,
                                Rng& rng) {
  std::vector<Dataset> train_parts;
  for (int b = 1; b <= 5; ++b) {
    const auto file = dir / ("data_batch_" + std::to_string(b) + ".bin");
    if (std::filesystem::exists(file)) train_parts.push_back(load_cifar10(file));
  }
  if (train_parts.empty()) throw FormatError("no data_batch_*.bin files in " + dir.string());
  const Dataset train = concat_datasets(train_parts);
  const Dataset test = load_cifar10(dir / "test_batch.bin");
  DatasetSplit split;
  split.pool = subsample(train, pool_size, SplitTag::Pool, rng);
  split.test = subsample(test, test_size, SplitTag::Test, rng);
  return split;
}

void normalize(DatasetSplit& split) {
  Dataset& pool = split.pool;
  const std::size_t n = pool.size();
  const std::size_t dim = pool.input_dim();
  if (n == 0) throw ValueError("cannot normalize an empty pool");
  if (split.test.input_dim() != dim) throw ShapeError("pool and test feature dimensions differ");

  NormStats stats{std::vector<Real>(dim, 0), std::vector<Real>(dim, 0)};
  std::vector<bool> constant(dim, true);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = pool.features.row(r);
    for (std::size_t c = 0; c < dim; ++c) {
      stats.mean[c] += row[c];
      if (row[c] != pool.features(0, c)) constant[c] = false;
    }
  }
  for (std::size_t c = 0; c < dim; ++c) {
    stats.mean[c] = constant[c] ? pool.features(0, c) : stats.mean[c] / static_cast<Real>(n);
  }
  for (std::size_t r = 0; r < n; ++r) {
    auto row = pool.features.row(r);
    for (std::size_t c = 0; c < dim; ++c) {
      const Real dv = row[c] - stats.mean[c];
      stats.std[c] += dv * dv;
    }
  }
  for (std::size_t c = 0; c < dim; ++c) stats.std[c] = std::sqrt(stats.std[c] / static_cast<Real>(n));

  auto apply = [&](Dataset& d) {
    for (std::size_t r = 0; r < d.size(); ++r) {
      auto row = d.features.row(r);
      for (std::size_t c = 0; c < dim; ++c) {
        row[c] -= stats.mean[c];
        if (!constant[c] && stats.std[c] > 0) row[c] /= stats.std[c];
      }
    }
    d.stats = stats;
  };
  apply(split.pool);
  apply(split.test);
}

void export_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  out << "id";
  for (std::size_t c = 0; c < dataset.input_dim(); ++c) out << ",x" << c;
  if (dataset.task == TaskKind::Classification) {
    out << ",label\n";
  } else {
    for (std::size_t c = 0; c < dataset.targets.cols(); ++c) out << ",y" << c;
    out << '\n';
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << i;
    for (Real v : dataset.features.row(i)) out << ',' << v;
    if (dataset.task == TaskKind::Classification) {
      out << ',' << dataset.labels[i];
    } else {
      for (Real v : dataset.targets.row(i)) out << ',' << v;
    }
    out << '\n';
  }
}

}  // namespace lloss
