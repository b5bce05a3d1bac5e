#pragma once

#include <span>
#include <vector>

#include "lloss/tensor.hpp"

namespace lloss {

struct OptimConfig {
  Real learning_rate = Real{0.1};
  Real momentum = Real{0.9};
  Real weight_decay = Real{0.0005};

  void validate() const;
};

/// Fully-connected layer; weight is [in x out], bias is [out].
struct Linear {
  ParamBlock weight;
  ParamBlock bias;

  Linear() = default;
  Linear(std::size_t in_dim, std::size_t out_dim);

  std::size_t in_dim() const { return weight.value.dim(0); }
  std::size_t out_dim() const { return weight.value.dim(1); }
  std::size_t parameter_count() const { return weight.value.size() + bias.value.size(); }
};

Tensor linear_forward(const Tensor& input, const ParamBlock& weight, const ParamBlock& bias);

/// Returns d(loss)/d(input) and accumulates into weight.gradient / bias.gradient.
Tensor linear_backward(const Tensor& grad_out, const Tensor& input, ParamBlock& weight, ParamBlock& bias);

inline Tensor linear_forward(const Tensor& input, const Linear& layer) {
  return linear_forward(input, layer.weight, layer.bias);
}
inline Tensor linear_backward(const Tensor& grad_out, const Tensor& input, Linear& layer) {
  return linear_backward(grad_out, input, layer.weight, layer.bias);
}

Tensor relu(const Tensor& input);
// Subgradient at exactly 0 is 0.
Tensor relu_backward(const Tensor& grad_out, const Tensor& input);

/// Per-sample loss values and the gradient of each sample's own loss with
/// respect to its prediction row (unscaled by batch size).
struct LossOutput {
  Tensor per_sample;  // [batch]
  Tensor grad;        // same shape as the prediction
};

Tensor softmax(const Tensor& logits);
LossOutput softmax_xent(const Tensor& logits, std::span<const int> labels);
LossOutput mse(const Tensor& pred, const Tensor& target);

/// Global average pooling: [B x C x H x W] -> [B x C]; rank-2 input passes through.
Tensor gap(const Tensor& feature);
Tensor gap_backward(const Tensor& grad_out, const Shape& input_shape);

/// g = grad + wd*value; velocity = momentum*velocity + g; value -= lr*velocity.
/// Gradients are zeroed afterward.
void sgd_step(std::span<ParamBlock* const> params, const OptimConfig& cfg);

/// Zero-mean Gaussian with std sqrt(2 / fan_in). fan_in is the leading
/// extent for rank <= 2 and the product of trailing extents otherwise.
Tensor he_init(const Shape& shape, Rng& rng);

}  // namespace lloss
