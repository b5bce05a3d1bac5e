#pragma once

#include <span>
#include <vector>

#include "lloss/acquisition.hpp"
#include "lloss/data.hpp"
#include "lloss/lossnet.hpp"
#include "lloss/pool.hpp"

namespace lloss {

inline constexpr std::size_t kDefaultEvalCap = 2000;

struct CycleRecord {
  std::size_t stage = 0;
  std::size_t labeled_size = 0;
  double test_metric = 0;       // accuracy, or mean test loss for regression
  double ranking_accuracy = 0;  // NaN when undefined
  double pearson = 0;           // predicted vs real loss; NaN when undefined
  double entropy_pearson = 0;   // entropy vs real loss; NaN for regression
  double seconds = 0;
  std::vector<std::size_t> selected_ids;
};

/// Per-sample quantities on the evaluation subset of the test split.
struct LossSnapshot {
  std::vector<std::size_t> ids;
  std::vector<Real> real;
  std::vector<Real> predicted;
  std::vector<Real> entropy;  // empty for regression
};

struct Evaluation {
  double test_metric = 0;
  double ranking_accuracy = 0;
  double pearson = 0;
  double entropy_pearson = 0;
  LossSnapshot losses;
};

/// Test metric on the full test split; loss-prediction metrics on `eval_ids`.
Evaluation evaluate(const ModelSet& models, const Dataset& test, std::span<const std::size_t> eval_ids);

/// Evaluation subset: at most `cap` test ids, uniform without replacement.
std::vector<std::size_t> evaluation_ids(const Dataset& test, std::size_t cap, Rng& rng);

/// K uniformly random ids form the stage-0 labeled set.
PoolState init_labeled(const Dataset& pool, std::size_t k, Rng& rng);

/// State that lives for one (strategy, trial) run.
struct CycleContext {
  TrainSchedule schedule;
  const Dataset* test = nullptr;
  std::vector<std::size_t> eval_ids;
  Oracle* oracle = nullptr;
  Rng selection_rng;
  Rng training_rng;
  bool record_wall_clock = false;
  std::vector<std::vector<EpochLog>> epoch_logs;  // one entry per training stage
};

struct CycleOutcome {
  PoolState state;
  ModelSet models;
  CycleRecord record;
  LossSnapshot losses;
};

/// Stage 0: train on the initial labeled set and evaluate. No selection.
CycleOutcome run_initial_stage(CycleContext& ctx, PoolState state, ModelSet models);

/// Select min(K, |U|) ids with the current models, reveal and label them,
/// retrain from the current parameters on the grown labeled set, evaluate.
CycleOutcome run_cycle(CycleContext& ctx, PoolState state, ModelSet models, const Strategy& strategy, std::size_t k,
                       std::size_t m);

}  // namespace lloss
