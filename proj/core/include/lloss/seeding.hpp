#pragma once

#include <cstdint>

namespace lloss {

/// Independent random streams of one trial. Every strategy of a trial draws
/// from the same seeds, which pairs them.
enum class Stream : std::uint64_t { InitialLabels = 1, ModelInit = 2, Training = 3, Selection = 4, Evaluation = 5 };

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, Stream stream);

}  // namespace lloss
