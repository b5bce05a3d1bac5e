#pragma once

#include <span>
#include <vector>

#include "lloss/data.hpp"

namespace lloss {

/// Partition of a pool dataset into labeled ids and unlabeled ids at stage s.
/// `labeled` keeps acquisition order; `unlabeled` stays sorted ascending.
struct PoolState {
  const Dataset* dataset = nullptr;
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
  std::size_t stage = 0;

  /// Throws ValueError unless labeled and unlabeled partition 0..n-1.
  void check_partition() const;
  /// Moves `ids` from unlabeled to labeled. Every id must be unlabeled.
  void label(std::span<const std::size_t> ids);
};

/// Simulated annotator: reveals each id's ground truth at most once.
class Oracle {
 public:
  explicit Oracle(const Dataset& dataset) : dataset_(&dataset), revealed_(dataset.size(), false) {}

  void reveal(std::span<const std::size_t> ids);
  bool is_revealed(std::size_t id) const { return revealed_.at(id); }
  std::size_t revealed_count() const { return count_; }

 private:
  const Dataset* dataset_;
  std::vector<bool> revealed_;
  std::size_t count_ = 0;
};

}  // namespace lloss
