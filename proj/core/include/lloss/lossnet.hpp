#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lloss/data.hpp"
#include "lloss/models.hpp"
#include "lloss/nn.hpp"

namespace lloss {

inline constexpr std::size_t kDefaultPredictorWidth = 128;

/// Loss prediction module. Each tapped feature goes through gap -> linear ->
/// relu to a `width`-dimensional vector; the concatenation is mapped to a
/// scalar predicted loss by a final linear layer.
class LossPredictor {
 public:
  LossPredictor(std::span<const std::size_t> tap_dims, std::size_t width);

  std::size_t tap_count() const { return branches_.size(); }
  std::size_t width() const { return width_; }
  std::vector<std::size_t> tap_dims() const;

  std::vector<Linear>& branches() { return branches_; }
  const std::vector<Linear>& branches() const { return branches_; }
  Linear& head() { return head_; }
  const Linear& head() const { return head_; }

  std::vector<ParamBlock*> parameters();
  std::vector<const ParamBlock*> parameters() const;
  std::size_t parameter_count() const;

 private:
  std::size_t width_;
  std::vector<Linear> branches_;
  Linear head_;
};

LossPredictor build_loss_predictor(std::span<const std::size_t> tap_dims, std::size_t width, Rng& rng);

struct PredictorTrace {
  std::vector<Shape> tap_shapes;
  std::vector<Tensor> pooled;
  std::vector<Tensor> pre_activations;
  Tensor concat;
  Tensor output;  // [batch]
};

PredictorTrace lpm_forward_trace(const LossPredictor& predictor, const FeatureSet& h);
/// Predicted loss per sample, shape [batch]. Values are unrestricted in sign.
Tensor lpm_forward(const LossPredictor& predictor, const FeatureSet& h);
/// Accumulates predictor gradients and returns d(objective)/d(h).
FeatureSet lpm_backward(LossPredictor& predictor, const PredictorTrace& trace, const Tensor& grad_pred);

/// Target model plus its loss predictor. The predictor must consume exactly
/// the target's taps and carry strictly fewer parameters than the target.
struct ModelSet {
  TargetModel target;
  LossPredictor predictor;

  ModelSet(TargetModel target_model, LossPredictor loss_predictor);

  std::vector<ParamBlock*> parameters();
  std::vector<const ParamBlock*> parameters() const;
};

ModelSet make_model_set(TargetModel target, std::size_t predictor_width, Rng& rng);

/// FNV-1a digest of parameter values; identifies a model snapshot.
std::uint64_t parameter_fingerprint(std::span<const ParamBlock* const> params);
std::uint64_t parameter_fingerprint(const ModelSet& models);

enum class LossObjective { MarginRanking, MeanSquared };

struct TrainSchedule {
  std::size_t epochs = 200;
  std::size_t batch_size = 128;
  std::optional<std::size_t> lr_drop_epoch = 160;  // nullopt: never drop
  Real lr_drop_factor = Real{0.1};
  Real grad_stop_fraction = Real{0.6};
  Real lambda = Real{1};
  Real margin = Real{1};
  OptimConfig optim;
  LossObjective objective = LossObjective::MarginRanking;

  std::size_t grad_stop_epoch() const;
  std::vector<std::string> violations() const;
  void validate() const;
};

/// Pairs consecutive positions: (b[0], b[1]), (b[2], b[3]), ...
std::vector<std::pair<std::size_t, std::size_t>> pair_batch(std::span<const std::size_t> batch);

struct PairLoss {
  Real value = 0;
  Real grad_i = 0;  // d/d(predicted_i)
  Real grad_j = 0;  // d/d(predicted_j)
};

/// max(0, -sign * (pred_i - pred_j) + margin) with sign = +1 if real_i > real_j
/// and -1 otherwise. Real losses are constants; an inactive hinge (value 0)
/// has zero gradient.
PairLoss ranking_loss(Real pred_i, Real pred_j, Real real_i, Real real_j, Real margin);

struct PointLoss {
  Real value = 0;
  Real grad = 0;
};

/// (pred - real)^2 with the real loss held constant.
PointLoss mse_ablation_loss(Real pred, Real real);

struct BatchLoss {
  Real total = 0;
  Real mean_target = 0;
  Real mean_ranking = 0;  // mean over pairs (or samples, for the MSE objective)
};

/// Mean target loss plus lambda times the mean loss-prediction loss over the
/// B/2 consecutive pairs. Accumulates gradients into every parameter. With
/// `stop_grad`, nothing from the loss-prediction term reaches the target.
BatchLoss joint_batch_loss(ModelSet& models, const Tensor& x, const Targets& y, const TrainSchedule& schedule,
                           bool stop_grad);

/// Target term only; used for a trailing batch that cannot be paired.
BatchLoss target_batch_loss(ModelSet& models, const Tensor& x, const Targets& y);

struct EpochLog {
  std::size_t epoch = 0;
  Real mean_target_loss = 0;
  Real mean_ranking_loss = 0;
  Real learning_rate = 0;
  bool barrier_active = false;
};

/// Shuffled mini-batch SGD over `labeled` for schedule.epochs epochs. Momentum
/// buffers are reset first; parameters are warm-started from their current values.
std::vector<EpochLog> train_model_set(ModelSet& models, const Dataset& data, std::span<const std::size_t> labeled,
                                      const TrainSchedule& schedule, Rng& rng);

/// Appends rows (epoch, mean_target_loss, mean_ranking_loss, learning_rate,
/// barrier_active); writes the header when the file is new.
void append_epoch_log_csv(const std::filesystem::path& path, std::span<const EpochLog> rows);

}  // namespace lloss
