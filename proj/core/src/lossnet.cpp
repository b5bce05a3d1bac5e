#include "lloss/lossnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

namespace lloss {

LossPredictor::LossPredictor(std::span<const std::size_t> tap_dims, std::size_t width) : width_(width) {
  if (tap_dims.empty()) throw ValueError("loss predictor needs at least one tap");
  if (width == 0) throw ValueError("loss predictor width must be positive");
  for (auto d : tap_dims) branches_.emplace_back(d, width);
  head_ = Linear(tap_dims.size() * width, 1);
}

std::vector<std::size_t> LossPredictor::tap_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& b : branches_) dims.push_back(b.in_dim());
  return dims;
}

std::vector<ParamBlock*> LossPredictor::parameters() {
  std::vector<ParamBlock*> out;
  for (auto& b : branches_) {
    out.push_back(&b.weight);
    out.push_back(&b.bias);
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::vector<const ParamBlock*> LossPredictor::parameters() const {
  std::vector<const ParamBlock*> out;
  for (const auto& b : branches_) {
    out.push_back(&b.weight);
    out.push_back(&b.bias);
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::size_t LossPredictor::parameter_count() const {
  std::size_t n = head_.parameter_count();
  for (const auto& b : branches_) n += b.parameter_count();
  return n;
}

LossPredictor build_loss_predictor(std::span<const std::size_t> tap_dims, std::size_t width, Rng& rng) {
  LossPredictor p(tap_dims, width);
  for (auto& b : p.branches()) b.weight.value = he_init(b.weight.value.shape(), rng);
  p.head().weight.value = he_init(p.head().weight.value.shape(), rng);
  return p;
}

PredictorTrace lpm_forward_trace(const LossPredictor& predictor, const FeatureSet& h) {
  if (h.size() != predictor.tap_count()) {
    throw ShapeError("loss predictor has " + std::to_string(predictor.tap_count()) + " branches, got " +
                     std::to_string(h.size()) + " features");
  }
  PredictorTrace trace;
  const std::size_t batch = h.front().dim(0);
  const std::size_t width = predictor.width();
  trace.concat = Tensor({batch, predictor.tap_count() * width});
  for (std::size_t t = 0; t < h.size(); ++t) {
    if (h[t].dim(0) != batch) throw ShapeError("tapped features disagree on batch size");
    trace.tap_shapes.push_back(h[t].shape());
    trace.pooled.push_back(gap(h[t]));
    if (trace.pooled.back().cols() != predictor.branches()[t].in_dim()) {
      throw ShapeError("tap " + std::to_string(t) + " has " + std::to_string(trace.pooled.back().cols()) +
                       " channels, branch expects " + std::to_string(predictor.branches()[t].in_dim()));
    }
    trace.pre_activations.push_back(linear_forward(trace.pooled.back(), predictor.branches()[t]));
    const Tensor act = relu(trace.pre_activations.back());
    for (std::size_t r = 0; r < batch; ++r) {
      auto src = act.row(r);
      std::copy(src.begin(), src.end(), trace.concat.row(r).begin() + static_cast<std::ptrdiff_t>(t * width));
    }
  }
  trace.output = linear_forward(trace.concat, predictor.head());
  trace.output.reshape({batch});
  return trace;
}

Tensor lpm_forward(const LossPredictor& predictor, const FeatureSet& h) {
  return lpm_forward_trace(predictor, h).output;
}

FeatureSet lpm_backward(LossPredictor& predictor, const PredictorTrace& trace, const Tensor& grad_pred) {
  const std::size_t batch = trace.concat.rows();
  const std::size_t width = predictor.width();
  require_shape(grad_pred, {batch}, "lpm_backward");
  Tensor grad_head = grad_pred;
  grad_head.reshape({batch, 1});
  const Tensor grad_concat = linear_backward(grad_head, trace.concat, predictor.head());

  FeatureSet grads;
  for (std::size_t t = 0; t < predictor.tap_count(); ++t) {
    Tensor g({batch, width});
    for (std::size_t r = 0; r < batch; ++r) {
      auto src = grad_concat.row(r).subspan(t * width, width);
      std::copy(src.begin(), src.end(), g.row(r).begin());
    }
    g = relu_backward(g, trace.pre_activations[t]);
    g = linear_backward(g, trace.pooled[t], predictor.branches()[t]);
    grads.push_back(gap_backward(g, trace.tap_shapes[t]));
  }
  return grads;
}

ModelSet::ModelSet(TargetModel target_model, LossPredictor loss_predictor)
    : target(std::move(target_model)), predictor(std::move(loss_predictor)) {
  if (predictor.tap_dims() != target.tap_dims()) {
    throw ShapeError("loss predictor branches do not match the target model's taps");
  }
  if (predictor.parameter_count() >= target.parameter_count()) {
    throw ValueError("loss predictor has " + std::to_string(predictor.parameter_count()) +
                     " parameters; it must be smaller than the target model (" +
                     std::to_string(target.parameter_count()) + ")");
  }
}

std::vector<ParamBlock*> ModelSet::parameters() {
  auto out = target.parameters();
  auto extra = predictor.parameters();
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

std::vector<const ParamBlock*> ModelSet::parameters() const {
  auto out = target.parameters();
  auto extra = predictor.parameters();
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

ModelSet make_model_set(TargetModel target, std::size_t predictor_width, Rng& rng) {
  auto dims = target.tap_dims();
  LossPredictor predictor = build_loss_predictor(dims, predictor_width, rng);
  return ModelSet(std::move(target), std::move(predictor));
}

std::uint64_t parameter_fingerprint(std::span<const ParamBlock* const> params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const ParamBlock* p : params) {
    for (Real v : p->value.values()) {
      const auto bits = std::bit_cast<std::uint64_t>(static_cast<double>(v));
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xFF;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

std::uint64_t parameter_fingerprint(const ModelSet& models) {
  const auto params = models.parameters();
  return parameter_fingerprint(params);
}

std::size_t TrainSchedule::grad_stop_epoch() const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(grad_stop_fraction) * static_cast<double>(epochs)));
}

std::vector<std::string> TrainSchedule::violations() const {
  std::vector<std::string> out;
  if (batch_size == 0 || batch_size % 2 != 0) out.emplace_back("batch_size must be a positive even number");
  if (!(lr_drop_factor > 0)) out.emplace_back("lr_drop_factor must be positive");
  if (!(grad_stop_fraction >= 0 && grad_stop_fraction <= 1)) out.emplace_back("grad_stop_fraction must lie in [0, 1]");
  if (!(lambda >= 0)) out.emplace_back("lambda must be nonnegative");
  if (!(margin > 0)) out.emplace_back("margin must be positive");
  if (!(optim.learning_rate > 0)) out.emplace_back("learning_rate must be positive");
  if (!(optim.momentum >= 0 && optim.momentum < 1)) out.emplace_back("momentum must lie in [0, 1)");
  if (!(optim.weight_decay >= 0)) out.emplace_back("weight_decay must be nonnegative");
  return out;
}

void TrainSchedule::validate() const {
  auto v = violations();
  if (!v.empty()) throw ValueError("invalid training schedule: " + v.front());
}

std::vector<std::pair<std::size_t, std::size_t>> pair_batch(std::span<const std::size_t> batch) {
  if (batch.size() % 2 != 0) {
    throw ValueError("cannot pair a batch of odd size " + std::to_string(batch.size()));
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(batch.size() / 2);
  for (std::size_t i = 0; i < batch.size(); i += 2) pairs.emplace_back(batch[i], batch[i + 1]);
  return pairs;
}

PairLoss ranking_loss(Real pred_i, Real pred_j, Real real_i, Real real_j, Real margin) {
  if (!(margin > 0)) throw ValueError("margin must be positive");
  const Real sign = real_i > real_j ? Real{1} : Real{-1};
  const Real arg = -sign * (pred_i - pred_j) + margin;
  if (arg > 0) return {arg, -sign, sign};
  return {};
}

PointLoss mse_ablation_loss(Real pred, Real real) {
  const Real diff = pred - real;
  return {diff * diff, 2 * diff};
}

namespace {

Real mean_of(const Tensor& t) {
  Real acc = 0;
  for (Real v : t.values()) acc += v;
  return acc / static_cast<Real>(t.size());
}

}  // namespace

BatchLoss joint_batch_loss(ModelSet& models, const Tensor& x, const Targets& y, const TrainSchedule& schedule,
                           bool stop_grad) {
  const std::size_t batch = x.rank() == 2 ? x.rows() : 0;
  if (batch % 2 != 0) throw ValueError("joint loss needs an even batch, got " + std::to_string(batch));
  if (!(schedule.margin > 0)) throw ValueError("margin must be positive");
  const TargetTrace trace = target_forward_trace(models.target, x);

  LossOutput loss = target_loss(trace.output, y, models.target.task());
  const Real inv_b = Real{1} / static_cast<Real>(batch);
  for (auto& g : loss.grad.values()) g *= inv_b;

  const PredictorTrace ptrace = lpm_forward_trace(models.predictor, trace.features);
  const Tensor& predicted = ptrace.output;
  const Tensor& real = loss.per_sample;  // constants for the predictor objective
  Tensor grad_pred({batch});
  Real sum = 0;
  Real term_count = 0;
  if (schedule.objective == LossObjective::MarginRanking) {
    const Real scale = schedule.lambda * 2 * inv_b;
    for (std::size_t i = 0; i + 1 < batch; i += 2) {
      const PairLoss p = ranking_loss(predicted[i], predicted[i + 1], real[i], real[i + 1], schedule.margin);
      sum += p.value;
      grad_pred[i] = scale * p.grad_i;
      grad_pred[i + 1] = scale * p.grad_j;
    }
    term_count = static_cast<Real>(batch / 2);
  } else {
    const Real scale = schedule.lambda * inv_b;
    for (std::size_t i = 0; i < batch; ++i) {
      const PointLoss p = mse_ablation_loss(predicted[i], real[i]);
      sum += p.value;
      grad_pred[i] = scale * p.grad;
    }
    term_count = static_cast<Real>(batch);
  }

  BatchLoss out;
  out.mean_target = mean_of(loss.per_sample);
  out.mean_ranking = sum / term_count;
  out.total = out.mean_target + schedule.lambda * out.mean_ranking;

  if (schedule.lambda != 0) {
    const FeatureSet grad_h = lpm_backward(models.predictor, ptrace, grad_pred);
    target_backward(models.target, trace, loss.grad, stop_grad ? nullptr : &grad_h);
  } else {
    target_backward(models.target, trace, loss.grad, nullptr);
  }
  return out;
}

BatchLoss target_batch_loss(ModelSet& models, const Tensor& x, const Targets& y) {
  const TargetTrace trace = target_forward_trace(models.target, x);
  LossOutput loss = target_loss(trace.output, y, models.target.task());
  const Real inv_b = Real{1} / static_cast<Real>(x.rows());
  for (auto& g : loss.grad.values()) g *= inv_b;
  target_backward(models.target, trace, loss.grad, nullptr);
  BatchLoss out;
  out.mean_target = mean_of(loss.per_sample);
  out.total = out.mean_target;
  return out;
}

std::vector<EpochLog> train_model_set(ModelSet& models, const Dataset& data, std::span<const std::size_t> labeled,
                                      const TrainSchedule& schedule, Rng& rng) {
  if (labeled.empty()) throw ValueError("cannot train on an empty labeled set");
  schedule.validate();

  const auto params = models.parameters();
  for (ParamBlock* p : params) {
    p->zero_grad();
    p->reset_velocity();
  }

  std::size_t batch = std::min(schedule.batch_size, labeled.size() - labeled.size() % 2);
  if (batch == 0) batch = 1;
  const std::size_t stop_epoch = schedule.grad_stop_epoch();

  std::vector<std::size_t> order(labeled.begin(), labeled.end());
  std::vector<EpochLog> logs;
  logs.reserve(schedule.epochs);
  for (std::size_t epoch = 0; epoch < schedule.epochs; ++epoch) {
    OptimConfig cfg = schedule.optim;
    if (schedule.lr_drop_epoch && epoch >= *schedule.lr_drop_epoch) cfg.learning_rate *= schedule.lr_drop_factor;
    const bool barrier = epoch >= stop_epoch;
    std::shuffle(order.begin(), order.end(), rng);

    Real target_sum = 0, ranking_sum = 0;
    std::size_t target_n = 0, ranking_n = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      const std::span<const std::size_t> ids(order.data() + start, len);
      const Tensor x = data.gather_features(ids);
      const Targets y = data.gather_targets(ids);
      if (len % 2 == 0) {
        const BatchLoss l = joint_batch_loss(models, x, y, schedule, barrier);
        ranking_sum += l.mean_ranking * static_cast<Real>(len);
        ranking_n += len;
        target_sum += l.mean_target * static_cast<Real>(len);
      } else {
        target_sum += target_batch_loss(models, x, y).mean_target * static_cast<Real>(len);
      }
      target_n += len;
      sgd_step(params, cfg);
    }
    logs.push_back({epoch, target_sum / static_cast<Real>(target_n),
                    ranking_n ? ranking_sum / static_cast<Real>(ranking_n) : Real{0}, cfg.learning_rate, barrier});
  }
  return logs;
}

void append_epoch_log_csv(const std::filesystem::path& path, std::span<const EpochLog> rows) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw FormatError("cannot append to " + path.string());
  out.precision(17);
  if (fresh) out << "epoch,mean_target_loss,mean_ranking_loss,learning_rate,barrier_active\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.mean_target_loss << ',' << r.mean_ranking_loss << ',' << r.learning_rate << ','
        << (r.barrier_active ? 1 : 0) << '\n';
  }
}

}  // namespace lloss
