#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "lloss/acquisition.hpp"
#include "lloss/lossnet.hpp"
#include "lloss/metrics.hpp"

using namespace lloss;

namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0, 1);
  Tensor t({rows, cols});
  for (auto& v : t.values()) v = normal(rng);
  return t;
}

void BM_LinearForward(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Linear layer(width, width);
  layer.weight.value = random_tensor(width, width, rng);
  const Tensor x = random_tensor(128, width, rng);
  for (auto _ : state) benchmark::DoNotOptimize(linear_forward(x, layer));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_LinearForward)->Arg(32)->Arg(128)->Arg(512);

void BM_LinearBackward(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  Linear layer(width, width);
  layer.weight.value = random_tensor(width, width, rng);
  const Tensor x = random_tensor(128, width, rng);
  const Tensor g = random_tensor(128, width, rng);
  for (auto _ : state) benchmark::DoNotOptimize(linear_backward(g, x, layer));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_LinearBackward)->Arg(32)->Arg(128)->Arg(512);

void BM_JointBatchLoss(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const std::vector<std::size_t> dims{32, 32, 32, 32};
  ModelSet m = make_model_set(build_mlp_classifier(20, dims, 4, rng), 16, rng);
  const Tensor x = random_tensor(batch, 20, rng);
  std::vector<int> labels(batch);
  for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<int>(i % 4);
  const Targets y = labels;
  TrainSchedule s;
  for (auto _ : state) {
    for (ParamBlock* p : m.parameters()) p->zero_grad();
    benchmark::DoNotOptimize(joint_batch_loss(m, x, y, s, false));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_JointBatchLoss)->Arg(32)->Arg(128);

void BM_CoresetSelect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  const Tensor labeled = random_tensor(100, 32, rng);
  const Tensor pool = random_tensor(n, 32, rng);
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  for (auto _ : state) benchmark::DoNotOptimize(coreset_select(labeled, pool, ids, 100));
}
BENCHMARK(BM_CoresetSelect)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_RankingAccuracy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Real> pred(n), real(n);
  for (std::size_t i = 0; i < n; ++i) {
    pred[i] = u(rng);
    real[i] = u(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(ranking_accuracy(pred, real));
  state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RankingAccuracy)->Arg(500)->Arg(2000)->Complexity();

}  // namespace
BENCHMARK_MAIN();
