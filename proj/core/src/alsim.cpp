#include "lloss/alsim.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "lloss/metrics.hpp"

namespace lloss {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Fn>
double or_nan(Fn&& fn) {
  try {
    return static_cast<double>(fn());
  } catch (const ValueError&) {
    return kNaN;
  }
}

}  // namespace

std::vector<std::size_t> evaluation_ids(const Dataset& test, std::size_t cap, Rng& rng) {
  std::vector<std::size_t> all(test.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (cap >= all.size()) return all;
  return sample_subset(all, cap, rng);
}

Evaluation evaluate(const ModelSet& models, const Dataset& test, std::span<const std::size_t> eval_ids) {
  Evaluation ev;
  ev.test_metric = test_metric(models, test);

  LossSnapshot& snap = ev.losses;
  snap.ids.assign(eval_ids.begin(), eval_ids.end());
  const Tensor outputs = predict_outputs(models.target, test, eval_ids);
  const LossOutput real = target_loss(outputs, test.gather_targets(eval_ids), models.target.task());
  const Tensor predicted = predict_losses(models, test, eval_ids);
  snap.real.assign(real.per_sample.values().begin(), real.per_sample.values().end());
  snap.predicted.assign(predicted.values().begin(), predicted.values().end());

  ev.ranking_accuracy = or_nan([&] { return ranking_accuracy(snap.predicted, snap.real); });
  ev.pearson = or_nan([&] { return pearson(snap.predicted, snap.real); });
  ev.entropy_pearson = kNaN;
  if (models.target.task() == TaskKind::Classification) {
    const Tensor probs = softmax(outputs);
    for (std::size_t i = 0; i < eval_ids.size(); ++i) snap.entropy.push_back(entropy(probs.row(i)));
    ev.entropy_pearson = or_nan([&] { return pearson(snap.entropy, snap.real); });
  }
  return ev;
}

PoolState init_labeled(const Dataset& pool, std::size_t k, Rng& rng) {
  if (k > pool.size()) {
    throw ValueError("initial labeled size " + std::to_string(k) + " exceeds pool size " + std::to_string(pool.size()));
  }
  std::vector<std::size_t> all(pool.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  PoolState state;
  state.dataset = &pool;
  state.unlabeled = all;
  if (k > 0) state.label(sample_subset(all, k, rng));
  state.stage = 0;
  return state;
}

namespace {

CycleOutcome train_and_record(CycleContext& ctx, PoolState state, ModelSet models, std::vector<std::size_t> selected,
                              std::chrono::steady_clock::time_point started) {
  ctx.epoch_logs.push_back(
      train_model_set(models, *state.dataset, state.labeled, ctx.schedule, ctx.training_rng));
  Evaluation ev = evaluate(models, *ctx.test, ctx.eval_ids);

  CycleRecord rec;
  rec.stage = state.stage;
  rec.labeled_size = state.labeled.size();
  rec.test_metric = ev.test_metric;
  rec.ranking_accuracy = ev.ranking_accuracy;
  rec.pearson = ev.pearson;
  rec.entropy_pearson = ev.entropy_pearson;
  rec.selected_ids = std::move(selected);
  if (ctx.record_wall_clock) {
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return {std::move(state), std::move(models), std::move(rec), std::move(ev.losses)};
}

}  // namespace

CycleOutcome run_initial_stage(CycleContext& ctx, PoolState state, ModelSet models) {
  const auto started = std::chrono::steady_clock::now();
  state.check_partition();
  state.stage = 0;
  return train_and_record(ctx, std::move(state), std::move(models), {}, started);
}

CycleOutcome run_cycle(CycleContext& ctx, PoolState state, ModelSet models, const Strategy& strategy, std::size_t k,
                       std::size_t m) {
  const auto started = std::chrono::steady_clock::now();
  if (state.unlabeled.empty()) throw ValueError("unlabeled pool is empty");
  std::vector<std::size_t> chosen = select(strategy, models, state, k, m, ctx.selection_rng);
  if (ctx.oracle) ctx.oracle->reveal(chosen);
  state.label(chosen);
  state.stage += 1;
  state.check_partition();
  return train_and_record(ctx, std::move(state), std::move(models), std::move(chosen), started);
}

}  // namespace lloss
