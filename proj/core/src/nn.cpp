#include "lloss/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lloss {

void OptimConfig::validate() const {
  if (!(learning_rate > 0)) throw ValueError("learning_rate must be positive");
  if (!(momentum >= 0 && momentum < 1)) throw ValueError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0)) throw ValueError("weight_decay must be nonnegative");
}

Linear::Linear(std::size_t in_dim, std::size_t out_dim)
    : weight(Tensor({in_dim, out_dim})), bias(Tensor({out_dim})) {}

Tensor linear_forward(const Tensor& input, const ParamBlock& weight, const ParamBlock& bias) {
  if (input.rank() != 2 || weight.value.rank() != 2 || bias.value.rank() != 1 ||
      input.cols() != weight.value.dim(0) || bias.value.dim(0) != weight.value.dim(1)) {
    throw ShapeError("linear_forward: input " + shape_str(input.shape()) + ", weight " +
                     shape_str(weight.value.shape()) + ", bias " + shape_str(bias.value.shape()));
  }
  const std::size_t batch = input.rows();
  const std::size_t in = weight.value.dim(0);
  const std::size_t out = weight.value.dim(1);
  const Real* w = weight.value.values().data();
  const Real* b = bias.value.values().data();

  Tensor result({batch, out});
  for (std::size_t r = 0; r < batch; ++r) {
    const Real* x = input.row(r).data();
    Real* y = result.row(r).data();
    for (std::size_t j = 0; j < out; ++j) y[j] = b[j];
    for (std::size_t k = 0; k < in; ++k) {
      const Real a = x[k];
      const Real* wk = w + k * out;
      for (std::size_t j = 0; j < out; ++j) y[j] += a * wk[j];
    }
  }
  check_finite(result, "linear_forward");
  return result;
}

Tensor linear_backward(const Tensor& grad_out, const Tensor& input, ParamBlock& weight, ParamBlock& bias) {
  if (input.rank() != 2 || grad_out.rank() != 2 || input.cols() != weight.value.dim(0) ||
      grad_out.cols() != weight.value.dim(1) || grad_out.rows() != input.rows()) {
    throw ShapeError("linear_backward: grad_out " + shape_str(grad_out.shape()) + ", input " +
                     shape_str(input.shape()) + ", weight " + shape_str(weight.value.shape()));
  }
  const std::size_t batch = input.rows();
  const std::size_t in = weight.value.dim(0);
  const std::size_t out = weight.value.dim(1);
  const Real* w = weight.value.values().data();
  Real* gw = weight.gradient.values().data();
  Real* gb = bias.gradient.values().data();

  Tensor grad_in({batch, in});
  for (std::size_t r = 0; r < batch; ++r) {
    const Real* g = grad_out.row(r).data();
    const Real* x = input.row(r).data();
    Real* gi = grad_in.row(r).data();
    for (std::size_t k = 0; k < in; ++k) {
      const Real* wk = w + k * out;
      Real* gwk = gw + k * out;
      Real acc = 0;
      for (std::size_t j = 0; j < out; ++j) {
        acc += g[j] * wk[j];
        gwk[j] += x[k] * g[j];
      }
      gi[k] = acc;
    }
    for (std::size_t j = 0; j < out; ++j) gb[j] += g[j];
  }
  return grad_in;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (auto& v : out.values()) v = v > 0 ? v : Real{0};
  return out;
}

Tensor relu_backward(const Tensor& grad_out, const Tensor& input) {
  if (grad_out.shape() != input.shape()) {
    throw ShapeError("relu_backward: grad " + shape_str(grad_out.shape()) + " vs input " +
                     shape_str(input.shape()));
  }
  Tensor grad = grad_out;
  auto g = grad.values();
  auto x = input.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(x[i] > 0)) g[i] = 0;
  }
  return grad;
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax expects [batch x classes], got " + shape_str(logits.shape()));
  Tensor p = logits;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    auto row = p.row(r);
    const Real m = *std::max_element(row.begin(), row.end());
    Real s = 0;
    for (auto& v : row) {
      v = std::exp(v - m);
      s += v;
    }
    for (auto& v : row) v /= s;
  }
  return p;
}

LossOutput softmax_xent(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || labels.size() != logits.rows()) {
    throw ShapeError("softmax_xent: logits " + shape_str(logits.shape()) + " with " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t classes = logits.cols();
  LossOutput out{Tensor({logits.rows()}), Tensor(logits.shape())};
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ValueError("label " + std::to_string(y) + " out of range [0, " + std::to_string(classes) + ")");
    }
    auto z = logits.row(r);
    const Real m = *std::max_element(z.begin(), z.end());
    Real s = 0;
    for (std::size_t c = 0; c < classes; ++c) s += std::exp(z[c] - m);
    const Real log_s = std::log(s);
    out.per_sample[r] = log_s - (z[static_cast<std::size_t>(y)] - m);
    auto g = out.grad.row(r);
    for (std::size_t c = 0; c < classes; ++c) g[c] = std::exp(z[c] - m - log_s);
    g[static_cast<std::size_t>(y)] -= 1;
  }
  check_finite(out.per_sample, "softmax_xent");
  return out;
}

LossOutput mse(const Tensor& pred, const Tensor& target) {
  if (pred.rank() != 2 || pred.shape() != target.shape()) {
    throw ShapeError("mse: prediction " + shape_str(pred.shape()) + " vs target " + shape_str(target.shape()));
  }
  const std::size_t d = pred.cols();
  const Real inv_d = Real{1} / static_cast<Real>(d);
  LossOutput out{Tensor({pred.rows()}), Tensor(pred.shape())};
  for (std::size_t r = 0; r < pred.rows(); ++r) {
    auto p = pred.row(r);
    auto t = target.row(r);
    auto g = out.grad.row(r);
    Real acc = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const Real diff = p[c] - t[c];
      acc += diff * diff;
      g[c] = 2 * diff * inv_d;
    }
    out.per_sample[r] = acc * inv_d;
  }
  check_finite(out.per_sample, "mse");
  return out;
}

Tensor gap(const Tensor& feature) {
  if (feature.rank() == 2) return feature;
  if (feature.rank() != 4) throw ShapeError("gap supports rank 2 or 4, got " + shape_str(feature.shape()));
  const std::size_t batch = feature.dim(0), channels = feature.dim(1);
  const std::size_t area = feature.dim(2) * feature.dim(3);
  Tensor out({batch, channels});
  const Real* src = feature.values().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      const Real* plane = src + (b * channels + c) * area;
      Real acc = 0;
      for (std::size_t i = 0; i < area; ++i) acc += plane[i];
      out(b, c) = acc / static_cast<Real>(area);
    }
  }
  return out;
}

Tensor gap_backward(const Tensor& grad_out, const Shape& input_shape) {
  if (input_shape.size() == 2) {
    if (grad_out.shape() != input_shape) throw ShapeError("gap_backward: gradient shape mismatch");
    return grad_out;
  }
  if (input_shape.size() != 4) throw ShapeError("gap supports rank 2 or 4, got " + shape_str(input_shape));
  const std::size_t batch = input_shape[0], channels = input_shape[1];
  const std::size_t area = input_shape[2] * input_shape[3];
  require_shape(grad_out, {batch, channels}, "gap_backward");
  Tensor grad(input_shape);
  Real* dst = grad.values().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      const Real share = grad_out(b, c) / static_cast<Real>(area);
      Real* plane = dst + (b * channels + c) * area;
      for (std::size_t i = 0; i < area; ++i) plane[i] = share;
    }
  }
  return grad;
}

void sgd_step(std::span<ParamBlock* const> params, const OptimConfig& cfg) {
  for (ParamBlock* p : params) {
    auto value = p->value.values();
    auto grad = p->gradient.values();
    auto vel = p->velocity.values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const Real g = grad[i] + cfg.weight_decay * value[i];
      vel[i] = cfg.momentum * vel[i] + g;
      value[i] -= cfg.learning_rate * vel[i];
    }
    check_finite(p->value, "sgd_step");
    p->zero_grad();
  }
}

Tensor he_init(const Shape& shape, Rng& rng) {
  Tensor t(shape);
  std::size_t fan_in = shape[0];
  if (shape.size() > 2) fan_in = shape_product(shape) / shape[0];
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& v : t.values()) v = static_cast<Real>(dist(rng));
  return t;
}

}  // namespace lloss
