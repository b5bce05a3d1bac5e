#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "lloss/data.hpp"
#include "oracles.hpp"

using namespace lloss;

namespace {

std::vector<std::uint8_t> fixture_bytes() {
  std::vector<std::uint8_t> bytes(2 * kCifarRecordBytes);
  bytes[0] = 3;
  for (std::size_t p = 0; p < kCifarPixels; ++p) bytes[1 + p] = static_cast<std::uint8_t>(p % 256);
  bytes[kCifarRecordBytes] = 9;
  for (std::size_t p = 0; p < kCifarPixels; ++p) bytes[kCifarRecordBytes + 1 + p] = static_cast<std::uint8_t>(255 - p % 7);
  return bytes;
}

}  // namespace

TEST(Synth, MixtureShapesAndBalance) {
  SynthConfig cfg;
  cfg.num_classes = 4;
  cfg.input_dim = 5;
  cfg.pool_size = 400;
  cfg.test_size = 100;
  cfg.seed = 3;
  const DatasetSplit s = generate(cfg);
  EXPECT_EQ(s.pool.size(), 400u);
  EXPECT_EQ(s.test.size(), 100u);
  EXPECT_EQ(s.pool.input_dim(), 5u);
  EXPECT_EQ(s.pool.output_dim(), 4u);
  std::vector<int> counts(4);
  for (int y : s.pool.labels) ++counts[static_cast<std::size_t>(y)];
  for (int c : counts) EXPECT_EQ(c, 100);
  const DatasetSplit again = generate(cfg);
  EXPECT_EQ(again.pool.features, s.pool.features);
}

TEST(Synth, MixtureMeansLieOnTheCircle) {
  SynthConfig cfg;
  cfg.num_classes = 4;
  cfg.radius = 2;
  cfg.noise = 0.5;
  cfg.pool_size = 40000;
  cfg.test_size = 1;
  cfg.seed = 4;
  const DatasetSplit s = generate(cfg);
  for (int c = 0; c < 4; ++c) {
    double mx = 0, my = 0, n = 0;
    for (std::size_t i = 0; i < s.pool.size(); ++i) {
      if (s.pool.labels[i] != c) continue;
      mx += s.pool.features(i, 0);
      my += s.pool.features(i, 1);
      ++n;
    }
    const double angle = 2 * M_PI * c / 4;
    // 3 sigma of a mean over 10^4 draws with std 0.5.
    EXPECT_NEAR(mx / n, 2 * std::cos(angle), 0.015);
    EXPECT_NEAR(my / n, 2 * std::sin(angle), 0.015);
  }
}

TEST(Synth, SineNoiseGrowsWithMagnitude) {
  SynthConfig cfg;
  cfg.kind = SynthKind::SineRegression;
  cfg.pool_size = 40000;
  cfg.test_size = 10;
  cfg.noise = 0.6;
  cfg.interval = 3;
  cfg.seed = 5;
  const DatasetSplit s = generate(cfg);
  EXPECT_EQ(s.pool.output_dim(), 1u);
  double inner = 0, outer = 0, ni = 0, no = 0;
  for (std::size_t i = 0; i < s.pool.size(); ++i) {
    const double x = s.pool.features(i, 0);
    ASSERT_LE(std::abs(x), 3.0);
    const double r = s.pool.targets(i, 0) - std::sin(x);
    if (std::abs(x) < 1) inner += r * r, ++ni;
    if (std::abs(x) > 2) outer += r * r, ++no;
  }
  // E[sigma^2] over |x| in [0,1] is 0.04/3; over [2,3] it is 0.04*19/3.
  EXPECT_NEAR(inner / ni, 0.04 / 3, 0.002);
  EXPECT_NEAR(outer / no, 0.04 * 19 / 3, 0.02);
}

TEST(Synth, ViolationsListEverything) {
  SynthConfig cfg;
  cfg.pool_size = 0;
  cfg.num_classes = 1;
  cfg.noise = -1;
  EXPECT_EQ(cfg.violations().size(), 3u);
  EXPECT_THROW(generate(cfg), ValueError);
}

TEST(Normalize, UsesPoolStatisticsForBothSplits) {
  DatasetSplit s;
  s.pool.features = Tensor({4, 2}, {1, 5, 3, 5, 5, 5, 7, 5});
  s.test.features = Tensor({1, 2}, {4, 6});
  normalize(s);
  const double sd = std::sqrt(5.0);
  EXPECT_NEAR(s.pool.features(0, 0), -3 / sd, 1e-12);
  EXPECT_EQ(s.pool.features(0, 1), 0);
  EXPECT_NEAR(s.test.features(0, 0), 0, 1e-12);
  EXPECT_EQ(s.test.features(0, 1), 1);
  ASSERT_TRUE(s.pool.stats);
  EXPECT_EQ(s.pool.stats->mean, (std::vector<Real>{4, 5}));
}

TEST(Cifar, FixtureParses) {
  const auto bytes = fixture_bytes();
  const Dataset d = parse_cifar10(bytes);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.labels, (std::vector<int>{3, 9}));
  EXPECT_EQ(d.input_dim(), kCifarPixels);
  EXPECT_EQ(d.features(0, 0), 0);
  EXPECT_DOUBLE_EQ(d.features(0, 255), 1.0);
  EXPECT_DOUBLE_EQ(d.features(0, 1024), 0.0);
  EXPECT_DOUBLE_EQ(d.features(1, 3), 252.0 / 255);
}

TEST(Cifar, RejectsMalformedInput) {
  auto bytes = fixture_bytes();
  EXPECT_THROW(parse_cifar10(std::span(bytes).first(bytes.size() - 1)), FormatError);
  EXPECT_THROW(parse_cifar10(std::span<const std::uint8_t>()), FormatError);
  bytes[kCifarRecordBytes] = 10;
  EXPECT_THROW(parse_cifar10(bytes), FormatError);
  EXPECT_THROW(load_cifar10("/nonexistent/cifar.bin"), FormatError);
}

TEST(Cifar, FileRoundTripIsByteExact) {
  const auto bytes = fixture_bytes();
  const auto dir = oracle::scratch_dir("cifar_roundtrip");
  const auto path = dir / "batch.bin";
  write_cifar10(path, parse_cifar10(bytes));
  std::ifstream in(path, std::ios::binary);
  const std::vector<std::uint8_t> back((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(back, bytes);
  EXPECT_EQ(encode_cifar10(load_cifar10(path)), bytes);
}

TEST(Cifar, SplitLoaderSubsamples) {
  const auto dir = oracle::scratch_dir("cifar_split");
  const auto bytes = fixture_bytes();
  for (int b = 1; b <= 5; ++b) {
    std::ofstream(dir / ("data_batch_" + std::to_string(b) + ".bin"), std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  std::ofstream(dir / "test_batch.bin", std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  Rng rng(1);
  const DatasetSplit s = load_cifar10_split(dir, 6, 2, rng);
  EXPECT_EQ(s.pool.size(), 6u);
  EXPECT_EQ(s.test.size(), 2u);
  EXPECT_EQ(s.test.labels, (std::vector<int>{3, 9}));
  EXPECT_THROW(load_cifar10_split(dir, 11, 2, rng), ValueError);
}
