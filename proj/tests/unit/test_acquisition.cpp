#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "lloss/acquisition.hpp"
#include "oracles.hpp"

using namespace lloss;

namespace {

std::vector<std::size_t> iota_ids(std::size_t n, std::size_t start = 0) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), start);
  return v;
}

Dataset mixture_pool(std::size_t n, std::uint64_t seed, TaskKind task = TaskKind::Classification) {
  SynthConfig cfg;
  cfg.kind = task == TaskKind::Classification ? SynthKind::GaussianMixture : SynthKind::SineRegression;
  cfg.pool_size = n;
  cfg.test_size = 1;
  cfg.seed = seed;
  return generate(cfg).pool;
}

ModelSet models_for(const Dataset& d, Rng& rng) {
  const std::vector<std::size_t> dims{16, 16};
  TargetModel t = d.task == TaskKind::Classification ? build_mlp_classifier(d.input_dim(), dims, d.num_classes, rng)
                                                     : build_mlp_regressor(d.input_dim(), dims, 1, rng);
  return make_model_set(std::move(t), 4, rng);
}

}  // namespace

TEST(Strategy, NamesRoundTrip) {
  for (auto k : {StrategyKind::Random, StrategyKind::Entropy, StrategyKind::CoreSet, StrategyKind::LearnedLoss,
                 StrategyKind::LearnedLossMSE}) {
    EXPECT_EQ(parse_strategy(strategy_name(k)), k);
  }
  EXPECT_THROW(parse_strategy("bald"), ValueError);
}

TEST(SampleSubset, SaturationAndDeterminism) {
  const auto pool = iota_ids(10, 100);
  Rng rng(1);
  EXPECT_EQ(sample_subset(pool, 25, rng), pool);
  Rng a(2), b(2);
  const auto s = sample_subset(pool, 4, a);
  EXPECT_EQ(s, sample_subset(pool, 4, b));
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 4u);
}

TEST(SampleSubset, InclusionIsUniform) {
  const auto pool = iota_ids(10);
  Rng rng(3);
  std::vector<int> hits(10);
  const int reps = 10000;
  for (int r = 0; r < reps; ++r)
    for (auto id : sample_subset(pool, 5, rng)) ++hits[id];
  const double sigma = std::sqrt(reps * 0.25);
  for (int h : hits) EXPECT_NEAR(h, reps * 0.5, 3 * sigma);
}

TEST(Entropy, ClosedForms) {
  std::vector<Real> uniform(10, Real{0.1});
  EXPECT_NEAR(entropy(uniform), std::log(10.0), 1e-12);
  std::vector<Real> one_hot(10, 0);
  one_hot[4] = 1;
  EXPECT_NEAR(entropy(one_hot), 0, 1e-12);
  std::vector<Real> half(6, 0);
  half[0] = half[1] = 0.5;
  EXPECT_NEAR(entropy(half), std::log(2.0), 1e-12);
}

TEST(Entropy, RegressionIsUnsupported) {
  Rng rng(4);
  const Dataset d = mixture_pool(20, 4, TaskKind::Regression);
  const ModelSet m = models_for(d, rng);
  const auto ids = iota_ids(20);
  EXPECT_THROW(score_entropy(m.target, d, ids), UnsupportedStrategy);

  PoolState state;
  state.dataset = &d;
  state.unlabeled = ids;
  EXPECT_THROW(select(Strategy{StrategyKind::Entropy, {}}, m, state, 2, 10, rng), UnsupportedStrategy);
}

TEST(LearnedLossScores, ZeroPredictorAndPermutation) {
  Rng rng(5);
  const Dataset d = mixture_pool(30, 5);
  const std::vector<std::size_t> dims{16, 16};
  const auto taps = dims;
  const ModelSet zero(build_mlp_classifier(2, dims, 4, rng), LossPredictor(taps, 4));
  for (const auto& e : score_learned_loss(zero, d, iota_ids(30)).entries) EXPECT_EQ(e.score, 0);

  const ModelSet m = models_for(d, rng);
  const std::vector<std::size_t> fwd{3, 8, 12, 20}, rev{20, 12, 8, 3};
  const auto a = score_learned_loss(m, d, fwd), b = score_learned_loss(m, d, rev);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.entries[i].id, b.entries[3 - i].id);
    EXPECT_EQ(a.entries[i].score, b.entries[3 - i].score);
  }
  EXPECT_EQ(a.model_snapshot, parameter_fingerprint(m));
}

TEST(TopK, ArgsortAndTies) {
  ScoredPool p{{{0, 0.1}, {1, 0.9}, {2, 0.5}}, 0};
  EXPECT_EQ(select_top_k(p, 2), (std::vector<std::size_t>{1, 2}));
  ScoredPool tied{{{7, 1}, {3, 1}, {5, 1}}, 0};
  EXPECT_EQ(select_top_k(tied, 2), (std::vector<std::size_t>{3, 5}));
  std::reverse(p.entries.begin(), p.entries.end());
  EXPECT_EQ(select_top_k(p, 2), (std::vector<std::size_t>{1, 2}));
  EXPECT_THROW(select_top_k(p, 4), ValueError);
}

TEST(CoreSet, HandTrace) {
  const Tensor labeled({1, 1}, {0});
  const Tensor pool({3, 1}, {1, 5, 11});
  const std::vector<std::size_t> ids{10, 20, 30};
  EXPECT_EQ(coreset_select(labeled, pool, ids, 2), (std::vector<std::size_t>{30, 20}));
  const auto all = coreset_select(labeled, pool, ids, 3);
  EXPECT_EQ(std::set<std::size_t>(all.begin(), all.end()), std::set<std::size_t>(ids.begin(), ids.end()));
  EXPECT_THROW(coreset_select(labeled, pool, ids, 4), ValueError);
  EXPECT_EQ(coreset_select(pool, ids, 1), (std::vector<std::size_t>{10}));
}

TEST(CoreSet, MatchesNaiveGreedyAndTwoApproximation) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0, 10);
  std::uniform_int_distribution<int> coarse(0, 4);
  for (int inst = 0; inst < 60; ++inst) {
    const std::size_t n = 2 + static_cast<std::size_t>(inst % 9);
    const std::size_t nl = static_cast<std::size_t>(inst % 3);
    const std::size_t k = 1 + static_cast<std::size_t>(inst) % (n - 1);
    // Every fourth instance uses a coarse grid so ties actually occur.
    auto draw = [&] { return inst % 4 == 0 ? static_cast<double>(coarse(rng)) : u(rng); };
    std::vector<oracle::Point> pool(n, oracle::Point(2)), lab(nl, oracle::Point(2));
    Tensor pf({n, 2}), lf;
    for (std::size_t i = 0; i < n; ++i)
      for (int d = 0; d < 2; ++d) pf(i, d) = pool[i][d] = draw();
    if (nl) {
      lf = Tensor({nl, 2});
      for (std::size_t i = 0; i < nl; ++i)
        for (int d = 0; d < 2; ++d) lf(i, d) = lab[i][d] = draw();
    }
    const auto ids = iota_ids(n);
    const auto got = nl ? coreset_select(lf, pf, ids, k) : coreset_select(pf, ids, k);
    EXPECT_EQ(got, oracle::naive_greedy(pool, lab, k));

    std::vector<oracle::Point> centers = lab;
    for (auto id : got) centers.push_back(pool[id]);
    EXPECT_LE(oracle::covering_radius(pool, centers), 2 * oracle::brute_force_k_center(pool, lab, k) + 1e-12);
  }
}

TEST(Select, OutputsAreDistinctUnlabeledIds) {
  Rng rng(7);
  const Dataset d = mixture_pool(120, 7);
  const ModelSet m = models_for(d, rng);
  for (int trial = 0; trial < 10; ++trial) {
    PoolState state;
    state.dataset = &d;
    state.unlabeled = iota_ids(120);
    state.label(sample_subset(state.unlabeled, 10 + static_cast<std::size_t>(trial) * 5, rng));
    for (auto kind : {StrategyKind::Random, StrategyKind::Entropy, StrategyKind::CoreSet, StrategyKind::LearnedLoss,
                      StrategyKind::LearnedLossMSE}) {
      const auto picked = select(Strategy{kind, {}}, m, state, 7, 30, rng);
      ASSERT_EQ(picked.size(), 7u);
      std::set<std::size_t> uniq(picked.begin(), picked.end());
      EXPECT_EQ(uniq.size(), 7u);
      for (auto id : picked) EXPECT_TRUE(std::binary_search(state.unlabeled.begin(), state.unlabeled.end(), id));
      for (auto id : picked) EXPECT_EQ(std::count(state.labeled.begin(), state.labeled.end(), id), 0);
    }
  }
}

TEST(Select, ExhaustionAndClamping) {
  Rng rng(8);
  const Dataset d = mixture_pool(12, 8);
  const ModelSet m = models_for(d, rng);
  PoolState state;
  state.dataset = &d;
  state.unlabeled = iota_ids(12);
  for (auto kind : {StrategyKind::Random, StrategyKind::Entropy, StrategyKind::CoreSet, StrategyKind::LearnedLoss}) {
    auto all = select(Strategy{kind, {}}, m, state, 12, 50, rng);
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, state.unlabeled);
  }
  PoolState few = state;
  few.label(iota_ids(9));
  EXPECT_EQ(select(Strategy{StrategyKind::LearnedLoss, {}}, m, few, 5, 50, rng).size(), 3u);
}

TEST(Select, RandomIsReproducible) {
  const Dataset d = mixture_pool(50, 9);
  Rng init(9);
  const ModelSet m = models_for(d, init);
  PoolState state;
  state.dataset = &d;
  state.unlabeled = iota_ids(50);
  Rng a(10), b(10);
  EXPECT_EQ(select(Strategy{}, m, state, 5, 50, a), select(Strategy{}, m, state, 5, 50, b));
}
