#include "lloss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lloss/acquisition.hpp"

namespace lloss {

Real ranking_accuracy(std::span<const Real> predicted, std::span<const Real> real) {
  if (predicted.size() != real.size()) throw ShapeError("ranking_accuracy: length mismatch");
  if (real.size() < 2) throw ValueError("ranking_accuracy needs at least 2 samples");
  std::size_t valid = 0, correct = 0;
  const std::size_t n = real.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (real[i] == real[j]) continue;
      ++valid;
      const bool real_order = real[i] > real[j];
      if (predicted[i] != predicted[j] && (predicted[i] > predicted[j]) == real_order) ++correct;
    }
  }
  if (valid == 0) throw ValueError("ranking_accuracy: all real losses are equal");
  return static_cast<Real>(static_cast<double>(correct) / static_cast<double>(valid));
}

Real pearson(std::span<const Real> x, std::span<const Real> y) {
  if (x.size() != y.size()) throw ShapeError("pearson: length mismatch");
  if (x.size() < 2) throw ValueError("pearson needs at least 2 samples");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw ValueError("pearson: correlation is undefined for a constant input");
  const double r = sxy / std::sqrt(sxx * syy);
  return static_cast<Real>(std::clamp(r, -1.0, 1.0));
}

Real test_metric(const TargetModel& model, const Dataset& test) {
  if (test.size() == 0) throw ValueError("test set is empty");
  std::vector<std::size_t> ids(test.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  const Tensor out = predict_outputs(model, test, ids);
  if (model.task() == TaskKind::Classification) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      auto row = out.row(i);
      const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      if (best == test.labels[i]) ++correct;
    }
    return static_cast<Real>(static_cast<double>(correct) / static_cast<double>(test.size()));
  }
  const LossOutput l = mse(out, test.targets);
  double acc = 0;
  for (Real v : l.per_sample.values()) acc += v;
  return static_cast<Real>(acc / static_cast<double>(test.size()));
}

}  // namespace lloss
