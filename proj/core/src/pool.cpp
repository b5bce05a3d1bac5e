#include "lloss/pool.hpp"

#include <algorithm>
#include <iterator>
#include <string>

namespace lloss {

void PoolState::check_partition() const {
  if (!dataset) throw ValueError("pool state has no dataset");
  const std::size_t n = dataset->size();
  if (labeled.size() + unlabeled.size() != n) throw ValueError("pool partition does not cover the dataset");
  std::vector<char> seen(n, 0);
  auto mark = [&](std::size_t id) {
    if (id >= n || seen[id]) throw ValueError("pool partition has a duplicate or out-of-range id");
    seen[id] = 1;
  };
  for (auto id : labeled) mark(id);
  for (auto id : unlabeled) mark(id);
}

void PoolState::label(std::span<const std::size_t> ids) {
  std::vector<std::size_t> incoming(ids.begin(), ids.end());
  std::sort(incoming.begin(), incoming.end());
  if (std::adjacent_find(incoming.begin(), incoming.end()) != incoming.end()) {
    throw ValueError("cannot label the same id twice");
  }
  std::vector<std::size_t> remaining;
  remaining.reserve(unlabeled.size());
  std::set_difference(unlabeled.begin(), unlabeled.end(), incoming.begin(), incoming.end(),
                      std::back_inserter(remaining));
  if (remaining.size() + incoming.size() != unlabeled.size()) {
    throw ValueError("selected ids must come from the unlabeled pool");
  }
  unlabeled = std::move(remaining);
  labeled.insert(labeled.end(), ids.begin(), ids.end());
}

void Oracle::reveal(std::span<const std::size_t> ids) {
  for (auto id : ids) {
    if (id >= dataset_->size()) throw ValueError("oracle asked for unknown id " + std::to_string(id));
    if (revealed_[id]) throw ValueError("oracle already revealed id " + std::to_string(id));
  }
  for (auto id : ids) {
    revealed_[id] = true;
    ++count_;
  }
}

}  // namespace lloss
