#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lloss/acquisition.hpp"
#include "lloss/alsim.hpp"
#include "lloss/data.hpp"
#include "lloss/lossnet.hpp"

namespace lloss {

struct CifarSource {
  std::filesystem::path path;  // directory with data_batch_*.bin and test_batch.bin
  std::size_t pool_size = 5000;
  std::size_t test_size = 2000;
  std::uint64_t seed = 0;
};

struct DatasetSpec {
  std::variant<SynthConfig, CifarSource> source = SynthConfig{};
  bool normalize = true;

  TaskKind task() const;
  std::size_t pool_size() const;
  std::size_t input_dim() const;
  std::size_t output_dim() const;
};

struct ModelSpec {
  std::vector<std::size_t> hidden_dims{32, 32, 32, 32};
  std::size_t predictor_width = kDefaultPredictorWidth;
};

struct ActiveLearningSpec {
  std::size_t k = 100;
  std::size_t m = 10000;
  std::size_t cycles = 8;
  std::size_t trials = 5;
  std::size_t eval_cap = kDefaultEvalCap;
};

struct ExperimentConfig {
  std::string run_id = "run";
  std::uint64_t seed = 0;
  DatasetSpec dataset;
  ModelSpec model;
  TrainSchedule schedule;
  Real mse_lambda = Real{0.1};  // lambda used by the learned_loss_mse strategy
  ActiveLearningSpec active;
  std::vector<Strategy> strategies;
  std::filesystem::path output_dir = "runs";
  bool record_wall_clock = false;

  /// Every violated constraint, not just the first.
  std::vector<std::string> violations() const;
};

/// Schedule a strategy trains with; the MSE ablation swaps objective and lambda.
TrainSchedule schedule_for(const ExperimentConfig& cfg, const Strategy& strategy);

struct TrialResult {
  std::vector<CycleRecord> records;
  LossSnapshot final_losses;
  std::vector<std::vector<EpochLog>> epoch_logs;
  std::vector<std::size_t> initial_labeled;
  std::size_t labels_revealed = 0;
  std::vector<Tensor> final_parameters;
  double wall_seconds = 0;
};

struct SummaryRow {
  std::size_t stage = 0;
  double labeled_size = 0;
  double mean = 0;
  double std = 0;  // population standard deviation across trials
};

struct StrategyResult {
  Strategy strategy;
  std::vector<TrialResult> trials;
  std::vector<SummaryRow> summary;  // of test_metric
};

struct ExperimentResult {
  TaskKind task = TaskKind::Classification;
  std::vector<StrategyResult> strategies;
};

/// Loads or generates the dataset, normalized when requested.
DatasetSplit prepare_data(const DatasetSpec& spec);

ModelSet initial_model_set(const ExperimentConfig& cfg, const Dataset& pool, std::size_t trial);

/// Runs every (strategy, trial) pair, up to `jobs` at a time. Results are
/// identical for any job count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1);

/// Mean and population std of one CycleRecord field per stage, trial order.
std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials, double CycleRecord::* field);

std::string format_real(double v);

struct RunFiles {
  std::filesystem::path summary;
  std::vector<std::pair<std::string, std::vector<std::filesystem::path>>> per_strategy;
};

/// Writes `<dir>/<strategy>/trial<t>.csv` (+ losses, epoch log, checkpoint)
/// and `<dir>/summary.csv`.
RunFiles write_run_outputs(const std::filesystem::path& dir, const ExperimentResult& result);

void write_trial_csv(const std::filesystem::path& path, const std::vector<CycleRecord>& records);
void write_losses_csv(const std::filesystem::path& path, const LossSnapshot& losses);
void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& result);

}  // namespace lloss
