#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "lloss/data.hpp"
#include "lloss/nn.hpp"

namespace lloss {

/// Tapped mid-level activations, ordered shallow to deep.
using FeatureSet = std::vector<Tensor>;

/// Perceptron target model: hidden blocks of (linear -> relu), each tapped
/// after its relu, followed by a linear head producing logits or outputs.
class TargetModel {
 public:
  TargetModel(TaskKind task, std::size_t input_dim, std::span<const std::size_t> hidden_dims,
              std::size_t output_dim);

  TaskKind task() const { return task_; }
  std::size_t input_dim() const { return blocks_.front().in_dim(); }
  std::size_t output_dim() const { return head_.out_dim(); }
  std::size_t tap_count() const { return blocks_.size(); }
  std::vector<std::size_t> tap_dims() const;

  std::vector<Linear>& blocks() { return blocks_; }
  const std::vector<Linear>& blocks() const { return blocks_; }
  Linear& head() { return head_; }
  const Linear& head() const { return head_; }

  /// Blocks in depth order then the head; weight before bias.
  std::vector<ParamBlock*> parameters();
  std::vector<const ParamBlock*> parameters() const;
  std::size_t parameter_count() const;

 private:
  TaskKind task_;
  std::vector<Linear> blocks_;
  Linear head_;
};

TargetModel build_mlp_classifier(std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                                 std::size_t num_classes, Rng& rng);
TargetModel build_mlp_regressor(std::size_t input_dim, std::span<const std::size_t> hidden_dims,
                                std::size_t output_dim, Rng& rng);

/// Everything the backward pass needs from one forward pass.
struct TargetTrace {
  Tensor input;
  std::vector<Tensor> pre_activations;
  FeatureSet features;
  Tensor output;
};

TargetTrace target_forward_trace(const TargetModel& model, const Tensor& x);
std::pair<Tensor, FeatureSet> target_forward(const TargetModel& model, const Tensor& x);

/// Backpropagates d(objective)/d(output) and, optionally, gradients arriving
/// at the tapped features. Accumulates into parameter gradients.
void target_backward(TargetModel& model, const TargetTrace& trace, const Tensor& grad_output,
                     const FeatureSet* grad_features);

/// Per-sample target loss: softmax cross-entropy or mean squared error.
LossOutput target_loss(const Tensor& prediction, const Targets& y, TaskKind task);

// Checkpoint format: "LRNK", u32 version, u64 tensor count, then per tensor
// u32 rank, u64 extents, f64 values; all little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, std::span<const ParamBlock* const> params);
void write_checkpoint(std::ostream& out, std::span<const Tensor> tensors);
std::vector<Tensor> read_checkpoint(std::istream& in);
/// Overwrites parameter values; shapes must match exactly.
void assign_checkpoint(std::span<ParamBlock* const> params, const std::vector<Tensor>& tensors);

void save_checkpoint(const std::filesystem::path& path, const TargetModel& model);
void load_checkpoint(const std::filesystem::path& path, TargetModel& model);

}  // namespace lloss
