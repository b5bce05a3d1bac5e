#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lloss/data.hpp"
#include "lloss/lossnet.hpp"
#include "lloss/pool.hpp"

namespace lloss {

enum class StrategyKind { Random, Entropy, CoreSet, LearnedLoss, LearnedLossMSE };

std::string_view strategy_name(StrategyKind kind);
/// Accepts the names produced by strategy_name; throws ValueError otherwise.
StrategyKind parse_strategy(std::string_view name);

struct Strategy {
  StrategyKind kind = StrategyKind::Random;
  std::optional<std::size_t> coreset_tap;  // CoreSet embedding tap; default deepest

  std::string name() const { return std::string(strategy_name(kind)); }
};

struct ScoredId {
  std::size_t id = 0;
  Real score = 0;
};

struct ScoredPool {
  std::vector<ScoredId> entries;
  std::uint64_t model_snapshot = 0;
};

/// min(M, |unlabeled|) distinct ids drawn uniformly without replacement,
/// returned in ascending order.
std::vector<std::size_t> sample_subset(std::span<const std::size_t> unlabeled, std::size_t m, Rng& rng);

/// Forward passes over `ids` in fixed-size chunks.
Tensor predict_losses(const ModelSet& models, const Dataset& data, std::span<const std::size_t> ids);
Tensor predict_outputs(const TargetModel& model, const Dataset& data, std::span<const std::size_t> ids);
/// Gap-pooled activations of tap `tap` for `ids`, [|ids| x channels].
Tensor tap_features(const TargetModel& model, const Dataset& data, std::span<const std::size_t> ids,
                    std::size_t tap);

/// -sum p ln p with 0 ln 0 = 0.
Real entropy(std::span<const Real> probs);

ScoredPool score_learned_loss(const ModelSet& models, const Dataset& data, std::span<const std::size_t> subset);
ScoredPool score_entropy(const TargetModel& model, const Dataset& data, std::span<const std::size_t> subset);

/// K-Center-Greedy: K times, add the pool point farthest (Euclidean) from its
/// nearest current center. Centers start as the labeled features. Ties go to
/// the smallest id. Returns ids in selection order.
std::vector<std::size_t> coreset_select(const Tensor& labeled_features, const Tensor& pool_features,
                                        std::span<const std::size_t> pool_ids, std::size_t k);
/// Same with no pre-existing centers.
std::vector<std::size_t> coreset_select(const Tensor& pool_features, std::span<const std::size_t> pool_ids,
                                        std::size_t k);

/// Ids of the K largest scores, ties to the smallest id, in rank order.
std::vector<std::size_t> select_top_k(const ScoredPool& scored, std::size_t k);

/// One acquisition step over the current unlabeled pool. Returns
/// min(K, |U|) distinct unlabeled ids.
std::vector<std::size_t> select(const Strategy& strategy, const ModelSet& models, const PoolState& state,
                                std::size_t k, std::size_t m, Rng& rng);

}  // namespace lloss
