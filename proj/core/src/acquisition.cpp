#include "lloss/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lloss {

namespace {

constexpr std::size_t kChunk = 512;

constexpr std::pair<StrategyKind, std::string_view> kNames[] = {
    {StrategyKind::Random, "random"},
    {StrategyKind::Entropy, "entropy"},
    {StrategyKind::CoreSet, "coreset"},
    {StrategyKind::LearnedLoss, "learned_loss"},
    {StrategyKind::LearnedLossMSE, "learned_loss_mse"},
};

// Applies `fn(chunk_ids, offset)` over consecutive chunks of ids.
template <typename Fn>
void for_chunks(std::span<const std::size_t> ids, Fn&& fn) {
  for (std::size_t start = 0; start < ids.size(); start += kChunk) {
    fn(ids.subspan(start, std::min(kChunk, ids.size() - start)), start);
  }
}

}  // namespace

std::string_view strategy_name(StrategyKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw ValueError("unknown strategy '" + std::string(name) + "'");
}

std::vector<std::size_t> sample_subset(std::span<const std::size_t> unlabeled, std::size_t m, Rng& rng) {
  if (m == 0) throw ValueError("subset size must be positive");
  std::vector<std::size_t> ids(unlabeled.begin(), unlabeled.end());
  const std::size_t take = std::min(m, ids.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(take);
  std::sort(ids.begin(), ids.end());
  return ids;
}

Tensor predict_losses(const ModelSet& models, const Dataset& data, std::span<const std::size_t> ids) {
  Tensor out({ids.size()});
  for_chunks(ids, [&](std::span<const std::size_t> chunk, std::size_t offset) {
    const auto [yhat, h] = target_forward(models.target, data.gather_features(chunk));
    const Tensor l = lpm_forward(models.predictor, h);
    for (std::size_t i = 0; i < chunk.size(); ++i) out[offset + i] = l[i];
  });
  return out;
}

Tensor predict_outputs(const TargetModel& model, const Dataset& data, std::span<const std::size_t> ids) {
  Tensor out({ids.size(), model.output_dim()});
  for_chunks(ids, [&](std::span<const std::size_t> chunk, std::size_t offset) {
    const auto [yhat, h] = target_forward(model, data.gather_features(chunk));
    std::copy(yhat.values().begin(), yhat.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(offset * model.output_dim()));
  });
  return out;
}

Tensor tap_features(const TargetModel& model, const Dataset& data, std::span<const std::size_t> ids,
                    std::size_t tap) {
  if (tap >= model.tap_count()) throw ValueError("tap index " + std::to_string(tap) + " out of range");
  const std::size_t channels = model.tap_dims()[tap];
  Tensor out({ids.size(), channels});
  for_chunks(ids, [&](std::span<const std::size_t> chunk, std::size_t offset) {
    const auto [yhat, h] = target_forward(model, data.gather_features(chunk));
    const Tensor pooled = gap(h[tap]);
    std::copy(pooled.values().begin(), pooled.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(offset * channels));
  });
  return out;
}

Real entropy(std::span<const Real> probs) {
  Real h = 0;
  for (Real p : probs) {
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

ScoredPool score_learned_loss(const ModelSet& models, const Dataset& data, std::span<const std::size_t> subset) {
  ScoredPool scored;
  scored.model_snapshot = parameter_fingerprint(models);
  if (subset.empty()) return scored;
  const Tensor l = predict_losses(models, data, subset);
  for (std::size_t i = 0; i < subset.size(); ++i) scored.entries.push_back({subset[i], l[i]});
  return scored;
}

ScoredPool score_entropy(const TargetModel& model, const Dataset& data, std::span<const std::size_t> subset) {
  if (model.task() != TaskKind::Classification) {
    throw UnsupportedStrategy("entropy sampling needs a classification target model");
  }
  ScoredPool scored;
  const auto params = model.parameters();
  scored.model_snapshot = parameter_fingerprint(params);
  if (subset.empty()) return scored;
  const Tensor probs = softmax(predict_outputs(model, data, subset));
  for (std::size_t i = 0; i < subset.size(); ++i) scored.entries.push_back({subset[i], entropy(probs.row(i))});
  return scored;
}

namespace {

Real squared_distance(std::span<const Real> a, std::span<const Real> b) {
  Real acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Real d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::vector<std::size_t> k_center_greedy(const Tensor* labeled, const Tensor& pool, std::span<const std::size_t> ids,
                                         std::size_t k) {
  const std::size_t n = ids.size();
  if (k > n) throw ValueError("coreset_select: K=" + std::to_string(k) + " exceeds pool size " + std::to_string(n));
  if (n == 0 || k == 0) return {};
  if (pool.rank() != 2 || pool.rows() != n) throw ShapeError("coreset_select: pool features and ids disagree");
  if (labeled && (labeled->rank() != 2 || labeled->cols() != pool.cols())) {
    throw ShapeError("coreset_select: labeled and pool feature widths differ");
  }

  std::vector<Real> nearest(n, std::numeric_limits<Real>::infinity());
  if (labeled) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < labeled->rows(); ++c) {
        nearest[i] = std::min(nearest[i], squared_distance(pool.row(i), labeled->row(c)));
      }
    }
  }
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (best == n || nearest[i] > nearest[best] || (nearest[i] == nearest[best] && ids[i] < ids[best])) best = i;
    }
    taken[best] = 1;
    chosen.push_back(ids[best]);
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) nearest[i] = std::min(nearest[i], squared_distance(pool.row(i), pool.row(best)));
    }
  }
  return chosen;
}

}  // namespace

std::vector<std::size_t> coreset_select(const Tensor& labeled_features, const Tensor& pool_features,
                                        std::span<const std::size_t> pool_ids, std::size_t k) {
  return k_center_greedy(&labeled_features, pool_features, pool_ids, k);
}

std::vector<std::size_t> coreset_select(const Tensor& pool_features, std::span<const std::size_t> pool_ids,
                                        std::size_t k) {
  return k_center_greedy(nullptr, pool_features, pool_ids, k);
}

std::vector<std::size_t> select_top_k(const ScoredPool& scored, std::size_t k) {
  if (k > scored.entries.size()) {
    throw ValueError("select_top_k: K=" + std::to_string(k) + " exceeds " + std::to_string(scored.entries.size()) +
                     " scored ids");
  }
  std::vector<ScoredId> ranked = scored.entries;
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(),
                    [](const ScoredId& a, const ScoredId& b) {
                      return a.score != b.score ? a.score > b.score : a.id < b.id;
                    });
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].id);
  return out;
}

std::vector<std::size_t> select(const Strategy& strategy, const ModelSet& models, const PoolState& state,
                                std::size_t k, std::size_t m, Rng& rng) {
  if (!state.dataset) throw ValueError("pool state has no dataset");
  const Dataset& data = *state.dataset;
  const std::size_t want = std::min(k, state.unlabeled.size());
  if (want == 0) return {};
  if (strategy.kind == StrategyKind::Random) return sample_subset(state.unlabeled, want, rng);
  if (strategy.kind == StrategyKind::Entropy && models.target.task() != TaskKind::Classification) {
    throw UnsupportedStrategy("entropy sampling needs a classification target model");
  }

  const auto subset = sample_subset(state.unlabeled, m, rng);
  if (subset.size() < want) {
    throw ValueError("subset size M=" + std::to_string(m) + " is smaller than K=" + std::to_string(want));
  }
  switch (strategy.kind) {
    case StrategyKind::Entropy:
      return select_top_k(score_entropy(models.target, data, subset), want);
    case StrategyKind::LearnedLoss:
    case StrategyKind::LearnedLossMSE:
      return select_top_k(score_learned_loss(models, data, subset), want);
    case StrategyKind::CoreSet: {
      const std::size_t tap = strategy.coreset_tap.value_or(models.target.tap_count() - 1);
      const Tensor pool_features = tap_features(models.target, data, subset, tap);
      if (state.labeled.empty()) return coreset_select(pool_features, subset, want);
      const Tensor labeled_features = tap_features(models.target, data, state.labeled, tap);
      return coreset_select(labeled_features, pool_features, subset, want);
    }
    case StrategyKind::Random:
      break;
  }
  throw ValueError("unhandled strategy");
}

}  // namespace lloss
