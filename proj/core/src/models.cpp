#include "lloss/models.hpp"

#include <string>

namespace lloss {

TargetModel::TargetModel(TaskKind task, std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                         std::size_t output_dim)
    : task_(task) {
  if (hidden_dims.size() < 2) throw ValueError("target model needs at least 2 hidden blocks");
  if (input_dim == 0 || output_dim == 0) throw ValueError("target model dimensions must be positive");
  std::size_t in = input_dim;
  for (auto width : hidden_dims) {
    if (width == 0) throw ValueError("hidden block width must be positive");
    blocks_.emplace_back(in, width);
    in = width;
  }
  head_ = Linear(in, output_dim);
}

std::vector<std::size_t> TargetModel::tap_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& b : blocks_) dims.push_back(b.out_dim());
  return dims;
}

std::vector<ParamBlock*> TargetModel::parameters() {
  std::vector<ParamBlock*> out;
  for (auto& b : blocks_) {
    out.push_back(&b.weight);
    out.push_back(&b.bias);
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::vector<const ParamBlock*> TargetModel::parameters() const {
  std::vector<const ParamBlock*> out;
  for (const auto& b : blocks_) {
    out.push_back(&b.weight);
    out.push_back(&b.bias);
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::size_t TargetModel::parameter_count() const {
  std::size_t n = head_.parameter_count();
  for (const auto& b : blocks_) n += b.parameter_count();
  return n;
}

namespace {

TargetModel build_mlp(TaskKind task, std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                      std::size_t output_dim, Rng& rng) {
  TargetModel model(task, input_dim, hidden_dims, output_dim);
  for (auto& b : model.blocks()) b.weight.value = he_init(b.weight.value.shape(), rng);
  model.head().weight.value = he_init(model.head().weight.value.shape(), rng);
  return model;
}

}  // namespace

TargetModel build_mlp_classifier(std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                                 std::size_t num_classes, Rng& rng) {
  if (num_classes < 2) throw ValueError("classifier needs at least 2 classes");
  return build_mlp(TaskKind::Classification, input_dim, hidden_dims, num_classes, rng);
}

TargetModel build_mlp_regressor(std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                                std::size_t output_dim, Rng& rng) {
  return build_mlp(TaskKind::Regression, input_dim, hidden_dims, output_dim, rng);
}

TargetTrace target_forward_trace(const TargetModel& model, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != model.input_dim()) {
    throw ShapeError("target_forward: expected [batch x " + std::to_string(model.input_dim()) + "], got " +
                     shape_str(x.shape()));
  }
  TargetTrace trace;
  trace.input = x;
  const Tensor* h = &trace.input;
  for (const auto& block : model.blocks()) {
    trace.pre_activations.push_back(linear_forward(*h, block));
    trace.features.push_back(relu(trace.pre_activations.back()));
    h = &trace.features.back();
  }
  trace.output = linear_forward(*h, model.head());
  return trace;
}

std::pair<Tensor, FeatureSet> target_forward(const TargetModel& model, const Tensor& x) {
  auto trace = target_forward_trace(model, x);
  return {std::move(trace.output), std::move(trace.features)};
}

void target_backward(TargetModel& model, const TargetTrace& trace, const Tensor& grad_output,
                     const FeatureSet* grad_features) {
  const std::size_t depth = model.blocks().size();
  if (grad_features && grad_features->size() != depth) {
    throw ShapeError("target_backward: expected " + std::to_string(depth) + " feature gradients");
  }
  Tensor grad = linear_backward(grad_output, trace.features.back(), model.head());
  for (std::size_t i = depth; i-- > 0;) {
    if (grad_features) {
      const Tensor& extra = (*grad_features)[i];
      require_shape(extra, grad.shape(), "target_backward feature gradient");
      auto g = grad.values();
      auto e = extra.values();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += e[k];
    }
    grad = relu_backward(grad, trace.pre_activations[i]);
    const Tensor& block_input = i == 0 ? trace.input : trace.features[i - 1];
    grad = linear_backward(grad, block_input, model.blocks()[i]);
  }
}

LossOutput target_loss(const Tensor& prediction, const Targets& y, TaskKind task) {
  if (task == TaskKind::Classification) {
    const auto* labels = std::get_if<std::vector<int>>(&y);
    if (!labels) throw ValueError("classification loss needs class-index labels");
    return softmax_xent(prediction, *labels);
  }
  const auto* values = std::get_if<Tensor>(&y);
  if (!values) throw ValueError("regression loss needs real-valued targets");
  return mse(prediction, *values);
}

}  // namespace lloss
