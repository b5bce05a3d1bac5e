#pragma once

#include <span>

#include "lloss/data.hpp"
#include "lloss/lossnet.hpp"

namespace lloss {

/// Fraction of pairs with distinct real losses whose predicted order strictly
/// agrees with the real order. Pairs with equal real losses are skipped;
/// pairs with equal predictions count as wrong.
Real ranking_accuracy(std::span<const Real> predicted, std::span<const Real> real);

/// Sample Pearson correlation coefficient.
Real pearson(std::span<const Real> x, std::span<const Real> y);

/// Classification: fraction of argmax-correct predictions (ties to the
/// smallest class index). Regression: mean per-sample squared error.
Real test_metric(const TargetModel& model, const Dataset& test);

inline Real test_metric(const ModelSet& models, const Dataset& test) { return test_metric(models.target, test); }

}  // namespace lloss
