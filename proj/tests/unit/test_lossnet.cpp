#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "lloss/lossnet.hpp"
#include "oracles.hpp"

using namespace lloss;

namespace {

Tensor random_input(std::size_t b, std::size_t d, Rng& rng) {
  std::normal_distribution<double> n(0, 1);
  Tensor t({b, d});
  for (auto& v : t.values()) v = n(rng);
  return t;
}

ModelSet small_set(Rng& rng, std::size_t classes = 3) {
  const std::vector<std::size_t> dims{6, 5};
  return make_model_set(build_mlp_classifier(3, dims, classes, rng), 2, rng);
}

Dataset blob_data(std::size_t n, Rng& rng) {
  Dataset d;
  d.task = TaskKind::Classification;
  d.num_classes = 3;
  d.features = random_input(n, 3, rng);
  for (std::size_t i = 0; i < n; ++i) d.labels.push_back(static_cast<int>(i % 3));
  return d;
}

}  // namespace

TEST(LossPredictor, ZeroParametersPredictZero) {
  const std::vector<std::size_t> taps{4, 3};
  LossPredictor p(taps, 8);
  Rng rng(1);
  const auto out = lpm_forward(p, FeatureSet{random_input(5, 4, rng), random_input(5, 3, rng)});
  ASSERT_EQ(out.shape(), Shape{5});
  for (Real v : out.values()) EXPECT_EQ(v, 0);
}

TEST(LossPredictor, RowsMatchSinglePassesAndRepeat) {
  Rng rng(2);
  const std::vector<std::size_t> taps{4, 3};
  const auto p = build_loss_predictor(taps, 8, rng);
  const FeatureSet h{random_input(4, 4, rng), random_input(4, 3, rng)};
  const Tensor out = lpm_forward(p, h);
  EXPECT_EQ(lpm_forward(p, h), out);
  for (std::size_t r = 0; r < 4; ++r) {
    const std::vector<std::size_t> id{r};
    const auto one = lpm_forward(p, FeatureSet{gather_rows(h[0], id), gather_rows(h[1], id)});
    EXPECT_EQ(one[0], out[r]);
  }
}

TEST(LossPredictor, PoolsRank4Features) {
  Rng rng(3);
  const std::vector<std::size_t> taps{2};
  const auto p = build_loss_predictor(taps, 4, rng);
  Tensor spatial({1, 2, 2, 2}, {1, 2, 3, 4, 10, 10, 10, 10});
  const Tensor pooled({1, 2}, {2.5, 10});
  EXPECT_EQ(lpm_forward(p, FeatureSet{spatial}), lpm_forward(p, FeatureSet{pooled}));
}

TEST(LossPredictor, BackwardMatchesFiniteDifferences) {
  Rng rng(4);
  const std::vector<std::size_t> taps{4, 3};
  auto p = build_loss_predictor(taps, 5, rng);
  FeatureSet h{random_input(3, 4, rng), random_input(3, 3, rng)};
  const Tensor w = random_input(3, 1, rng);
  const Tensor gw({3}, std::vector<Real>(w.values().begin(), w.values().end()));
  auto f = [&] {
    const Tensor o = lpm_forward(p, h);
    double s = 0;
    for (std::size_t i = 0; i < 3; ++i) s += o[i] * gw[i];
    return s;
  };
  const FeatureSet gh = lpm_backward(p, lpm_forward_trace(p, h), gw);
  for (std::size_t k = 0; k < h.size(); ++k) {
    EXPECT_LT(oracle::rel_error(oracle::as_doubles(gh[k].values()), oracle::central_diff(h[k], f)), 1e-4);
  }
  for (ParamBlock* b : p.parameters()) {
    EXPECT_LT(oracle::rel_error(oracle::as_doubles(b->gradient.values()), oracle::central_diff(b->value, f)), 1e-4);
  }
}

TEST(ModelSet, EnforcesTapMatchAndSize) {
  Rng rng(5);
  const std::vector<std::size_t> dims{6, 5};
  auto target = build_mlp_classifier(3, dims, 3, rng);
  const std::vector<std::size_t> wrong{6, 4};
  EXPECT_THROW(ModelSet(target, build_loss_predictor(wrong, 2, rng)), ShapeError);
  EXPECT_THROW(make_model_set(target, 128, rng), ValueError);
  EXPECT_NO_THROW(make_model_set(target, 2, rng));
}

TEST(PairBatch, Definition) {
  const std::vector<std::size_t> abcd{7, 3, 9, 1};
  const auto pairs = pair_batch(abcd);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0], std::make_pair(std::size_t{7}, std::size_t{3}));
  EXPECT_EQ(pairs[1], std::make_pair(std::size_t{9}, std::size_t{1}));
  EXPECT_EQ(pair_batch(std::vector<std::size_t>{0, 1}).size(), 1u);
  EXPECT_THROW(pair_batch(std::vector<std::size_t>{0, 1, 2}), ValueError);
}

TEST(PairBatch, PartitionsEveryEvenBatch) {
  for (std::size_t b = 2; b <= 128; b += 2) {
    std::vector<std::size_t> batch(b);
    for (std::size_t i = 0; i < b; ++i) batch[i] = 1000 - 3 * i;
    std::multiset<std::size_t> seen;
    for (const auto& [i, j] : pair_batch(batch)) seen.insert({i, j});
    EXPECT_EQ(seen, std::multiset<std::size_t>(batch.begin(), batch.end()));
  }
}

TEST(RankingLoss, WorkedExamples) {
  const PairLoss a = ranking_loss(0.5, 0.3, 2, 1, 1);
  EXPECT_DOUBLE_EQ(a.value, 0.8);
  EXPECT_EQ(a.grad_i, -1);
  EXPECT_EQ(a.grad_j, 1);

  const PairLoss b = ranking_loss(3, 1, 2, 1, 1);
  EXPECT_EQ(b.value, 0);
  EXPECT_EQ(b.grad_i, 0);
  EXPECT_EQ(b.grad_j, 0);

  const PairLoss tie = ranking_loss(0.2, 0.2, 1, 1, 1);
  EXPECT_EQ(tie.value, 1.0);
  EXPECT_EQ(tie.grad_i, 1);
  EXPECT_EQ(tie.grad_j, -1);

  EXPECT_THROW(ranking_loss(0, 0, 1, 2, 0), ValueError);
}

TEST(RankingLoss, OrderOnlyInRealLosses) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    const Real pi = u(rng), pj = u(rng), li = u(rng), lj = i % 7 == 0 ? li : u(rng);
    const PairLoss raw = ranking_loss(pi, pj, li, lj, 1);
    const PairLoss mapped = ranking_loss(pi, pj, std::exp(li), std::exp(lj), 1);
    EXPECT_EQ(raw.value, mapped.value);
    EXPECT_EQ(raw.grad_i, mapped.grad_i);
    EXPECT_EQ(raw.grad_j, mapped.grad_j);
  }
}

TEST(RankingLoss, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 200; ++i) {
    const double pi = u(rng), pj = u(rng), li = u(rng), lj = u(rng);
    const PairLoss l = ranking_loss(pi, pj, li, lj, 0.7);
    const double sign = li > lj ? 1 : -1;
    if (std::abs(-sign * (pi - pj) + 0.7) < 1e-3) continue;
    const double h = 1e-6;
    const double di = (ranking_loss(pi + h, pj, li, lj, 0.7).value - ranking_loss(pi - h, pj, li, lj, 0.7).value) / (2 * h);
    const double dj = (ranking_loss(pi, pj + h, li, lj, 0.7).value - ranking_loss(pi, pj - h, li, lj, 0.7).value) / (2 * h);
    EXPECT_NEAR(l.grad_i, di, 1e-6);
    EXPECT_NEAR(l.grad_j, dj, 1e-6);
  }
}

TEST(MseAblation, Values) {
  EXPECT_EQ(mse_ablation_loss(1.5, 1.5).value, 0);
  const PointLoss p = mse_ablation_loss(2, 0);
  EXPECT_EQ(p.value, 4);
  EXPECT_EQ(p.grad, 4);
  const double h = 1e-6;
  EXPECT_NEAR(mse_ablation_loss(0.3, -1.1).grad,
              (mse_ablation_loss(0.3 + h, -1.1).value - mse_ablation_loss(0.3 - h, -1.1).value) / (2 * h), 1e-6);
}

TEST(JointLoss, HandEvaluation) {
  // Regression with zero-weight predictor: l_hat = (0, 0); target losses set
  // through the head bias so that per-sample squared errors are 1 and 3.
  const std::vector<std::size_t> dims{8, 8};
  TargetModel target(TaskKind::Regression, 1, dims, 1);
  const std::vector<std::size_t> taps{8, 8};
  ModelSet m(std::move(target), LossPredictor(taps, 2));
  const Tensor x({2, 1}, {0, 0});
  const Targets y = Tensor({2, 1}, {1, std::sqrt(3.0)});
  TrainSchedule s;
  s.lambda = 1;
  s.margin = 1;
  const BatchLoss l = joint_batch_loss(m, x, y, s, false);
  EXPECT_NEAR(l.mean_target, 2.0, 1e-12);
  EXPECT_EQ(l.mean_ranking, 1.0);
  EXPECT_NEAR(l.total, 3.0, 1e-12);

  s.lambda = 0;
  const BatchLoss z = joint_batch_loss(m, x, y, s, false);
  EXPECT_EQ(z.total, z.mean_target);
}

TEST(JointLoss, OddBatchRejectedBeforeAnyWork) {
  Rng rng(8);
  ModelSet m = small_set(rng);
  const Tensor x = random_input(3, 3, rng);
  const Targets y = std::vector<int>{0, 1, 2};
  EXPECT_THROW(joint_batch_loss(m, x, y, TrainSchedule{}, false), ValueError);
  for (const ParamBlock* p : std::as_const(m).parameters())
    for (Real v : p->gradient.values()) EXPECT_EQ(v, 0);
}

TEST(JointLoss, ValueMatchesReferenceObjective) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    ModelSet m = small_set(rng);
    const Tensor x = random_input(6, 3, rng);
    const Targets y = std::vector<int>{0, 1, 2, 2, 1, 0};
    TrainSchedule s;
    s.lambda = 0.5 + trial * 0.1;
    const BatchLoss l = joint_batch_loss(m, x, y, s, false);
    const auto ref = oracle::reference_joint(m, x, y, s.lambda, s.margin);
    EXPECT_NEAR(l.total, ref.total, 1e-12);
    EXPECT_NEAR(l.mean_target, ref.mean_target, 1e-12);
  }
}

TEST(JointLoss, StopGradientMatchesLambdaZeroForTarget) {
  Rng rng(10);
  ModelSet a = small_set(rng);
  ModelSet b = a;
  const Tensor x = random_input(8, 3, rng);
  const Targets y = std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1};
  TrainSchedule s;
  joint_batch_loss(a, x, y, s, true);
  s.lambda = 0;
  joint_batch_loss(b, x, y, s, false);
  const auto pa = a.target.parameters(), pb = b.target.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->gradient, pb[i]->gradient);
}

TEST(Schedule, ViolationsAndGradStopEpoch) {
  TrainSchedule s;
  s.epochs = 10;
  EXPECT_EQ(s.grad_stop_epoch(), 6u);
  EXPECT_TRUE(s.violations().empty());
  s.batch_size = 7;
  s.margin = 0;
  s.lambda = -1;
  const auto v = s.violations();
  EXPECT_EQ(v.size(), 3u);
  EXPECT_NE(v[0].find("batch_size"), std::string::npos);
  EXPECT_THROW(s.validate(), ValueError);
}

TEST(Training, ZeroEpochsLeaveParametersUnchanged) {
  Rng rng(11);
  ModelSet m = small_set(rng);
  const auto before = parameter_fingerprint(m);
  const Dataset d = blob_data(20, rng);
  std::vector<std::size_t> ids(20);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  TrainSchedule s;
  s.epochs = 0;
  s.lr_drop_epoch.reset();
  const auto logs = train_model_set(m, d, ids, s, rng);
  EXPECT_TRUE(logs.empty());
  EXPECT_EQ(parameter_fingerprint(m), before);
}

TEST(Training, SeededRunsAreBitwiseRepeatable) {
  Rng init(12);
  const ModelSet start = small_set(init);
  const Dataset d = blob_data(30, init);
  std::vector<std::size_t> ids(30);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  TrainSchedule s;
  s.epochs = 5;
  s.batch_size = 8;
  s.lr_drop_epoch = 3;
  s.optim.learning_rate = 0.01;

  ModelSet a = start, b = start;
  Rng ra(99), rb(99);
  const auto la = train_model_set(a, d, ids, s, ra);
  train_model_set(b, d, ids, s, rb);
  EXPECT_EQ(parameter_fingerprint(a), parameter_fingerprint(b));
  EXPECT_NE(parameter_fingerprint(a), parameter_fingerprint(start));

  ASSERT_EQ(la.size(), 5u);
  EXPECT_FALSE(la[2].barrier_active);
  EXPECT_TRUE(la[3].barrier_active);
  EXPECT_DOUBLE_EQ(la[2].learning_rate, 0.01);
  EXPECT_DOUBLE_EQ(la[3].learning_rate, 0.001);
}

TEST(Training, BarrierEpochMatchesLambdaZeroRun) {
  Rng init(13);
  const ModelSet start = small_set(init);
  const Dataset d = blob_data(40, init);
  std::vector<std::size_t> ids(40);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  TrainSchedule s;
  s.epochs = 1;
  s.batch_size = 8;
  s.grad_stop_fraction = 0;
  s.optim.learning_rate = 0.05;

  ModelSet barrier = start, zero = start, open = start;
  Rng r1(5), r2(5), r3(5);
  train_model_set(barrier, d, ids, s, r1);
  TrainSchedule z = s;
  z.lambda = 0;
  train_model_set(zero, d, ids, z, r2);
  TrainSchedule o = s;
  o.grad_stop_fraction = 1;
  train_model_set(open, d, ids, o, r3);

  EXPECT_EQ(parameter_fingerprint(barrier.target.parameters()), parameter_fingerprint(zero.target.parameters()));
  EXPECT_NE(parameter_fingerprint(open.target.parameters()), parameter_fingerprint(zero.target.parameters()));
}
