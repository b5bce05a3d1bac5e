#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "lloss/experiment.hpp"
#include "oracles.hpp"

using namespace lloss;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.run_id = "tiny";
  cfg.seed = 4;
  SynthConfig s;
  s.pool_size = 200;
  s.test_size = 50;
  s.seed = 2;
  cfg.dataset.source = s;
  cfg.model.hidden_dims = {16, 16};
  cfg.model.predictor_width = 4;
  cfg.schedule.epochs = 3;
  cfg.schedule.batch_size = 16;
  cfg.schedule.lr_drop_epoch.reset();
  cfg.schedule.optim.learning_rate = 0.01;
  cfg.active = {20, 100, 2, 2, 50};
  cfg.strategies = {Strategy{StrategyKind::Random, {}}, Strategy{StrategyKind::LearnedLoss, {}},
                    Strategy{StrategyKind::LearnedLossMSE, {}}};
  return cfg;
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, TinyConfigIsValid) { EXPECT_TRUE(tiny_config().violations().empty()); }

TEST(Config, ViolationsAreExhaustive) {
  ExperimentConfig cfg = tiny_config();
  cfg.schedule.margin = 0;
  cfg.schedule.batch_size = 15;
  cfg.active.k = 500;
  cfg.strategies.push_back(Strategy{StrategyKind::Random, {}});
  const auto v = cfg.violations();
  EXPECT_TRUE(mentions(v, "margin must be positive"));
  EXPECT_TRUE(mentions(v, "batch_size"));
  EXPECT_TRUE(mentions(v, "exceeds the pool size"));
  EXPECT_TRUE(mentions(v, "duplicate strategy random"));
  EXPECT_GE(v.size(), 4u);
}

TEST(Config, StructuralViolations) {
  ExperimentConfig cfg = tiny_config();
  cfg.model.predictor_width = 64;
  cfg.active.m = 5;
  cfg.active.cycles = 10;
  cfg.strategies = {};
  const auto v = cfg.violations();
  EXPECT_TRUE(mentions(v, "smaller than the target"));
  EXPECT_TRUE(mentions(v, "M must be at least K"));
  EXPECT_TRUE(mentions(v, "exhaust the pool"));
  EXPECT_TRUE(mentions(v, "at least one strategy"));

  ExperimentConfig reg = tiny_config();
  SynthConfig s;
  s.kind = SynthKind::SineRegression;
  reg.dataset.source = s;
  reg.strategies = {Strategy{StrategyKind::Entropy, {}}};
  EXPECT_TRUE(mentions(reg.violations(), "entropy requires a classification"));
}

TEST(Config, MseStrategySwapsObjective) {
  const ExperimentConfig cfg = tiny_config();
  const TrainSchedule s = schedule_for(cfg, Strategy{StrategyKind::LearnedLossMSE, {}});
  EXPECT_EQ(s.objective, LossObjective::MeanSquared);
  EXPECT_DOUBLE_EQ(s.lambda, 0.1);
  EXPECT_EQ(schedule_for(cfg, Strategy{}).objective, LossObjective::MarginRanking);
}

TEST(Summary, MeanAndPopulationStd) {
  std::vector<TrialResult> trials(2);
  for (int t = 0; t < 2; ++t) {
    for (std::size_t s = 0; s < 2; ++s) {
      CycleRecord r;
      r.stage = s;
      r.labeled_size = 10 * (s + 1);
      r.test_metric = t == 0 ? 0.5 : 0.7;
      trials[static_cast<std::size_t>(t)].records.push_back(r);
    }
  }
  const auto rows = summarize(trials, &CycleRecord::test_metric);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].mean, 0.6);
  EXPECT_NEAR(rows[0].std, 0.1, 1e-15);
  EXPECT_EQ(rows[1].labeled_size, 20);

  const auto single = summarize(std::vector<TrialResult>{trials[0]}, &CycleRecord::test_metric);
  EXPECT_EQ(single[0].std, 0);
  trials[1].records.pop_back();
  EXPECT_THROW(summarize(trials, &CycleRecord::test_metric), ValueError);
}

TEST(Summary, FormatRealRoundTrips) {
  EXPECT_EQ(format_real(std::nan("")), "nan");
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 123456789.125}) EXPECT_EQ(std::stod(format_real(v)), v);
}

TEST(Experiment, SeedPairingAndJobIndependence) {
  const ExperimentConfig cfg = tiny_config();
  const ExperimentResult a = run_experiment(cfg, 1);
  const ExperimentResult b = run_experiment(cfg, 3);
  ASSERT_EQ(a.strategies.size(), 3u);
  for (std::size_t t = 0; t < 2; ++t) {
    const auto& base = a.strategies[0].trials[t].initial_labeled;
    EXPECT_EQ(base.size(), 20u);
    for (const auto& s : a.strategies) EXPECT_EQ(s.trials[t].initial_labeled, base);
    // Random and learned_loss train the same way at stage 0.
    EXPECT_EQ(a.strategies[0].trials[t].records[0].test_metric, a.strategies[1].trials[t].records[0].test_metric);
  }
  EXPECT_NE(a.strategies[0].trials[0].initial_labeled, a.strategies[0].trials[1].initial_labeled);

  const auto da = oracle::scratch_dir("exp_a"), db = oracle::scratch_dir("exp_b");
  const RunFiles fa = write_run_outputs(da, a);
  write_run_outputs(db, b);
  EXPECT_EQ(slurp(fa.summary), slurp(db / "summary.csv"));
  for (const auto& [name, files] : fa.per_strategy) {
    ASSERT_EQ(files.size(), 2u);
    for (const auto& f : files) EXPECT_EQ(slurp(f), slurp(db / name / f.filename()));
  }

  const auto& rec = a.strategies[1].trials[0].records;
  ASSERT_EQ(rec.size(), 3u);
  EXPECT_EQ(rec.back().labeled_size, 60u);
  EXPECT_EQ(a.strategies[1].trials[0].labels_revealed, 60u);
  EXPECT_TRUE(std::filesystem::exists(da / "learned_loss" / "trial1.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(da / "learned_loss" / "trial1_epochs.csv"));
}

TEST(Experiment, InvalidConfigThrowsBeforeRunning) {
  ExperimentConfig cfg = tiny_config();
  cfg.schedule.batch_size = 3;
  EXPECT_THROW(run_experiment(cfg), ValueError);
}
