#pragma once

// Independent reference implementations used only by tests. Nothing here calls
// into the code paths it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "tierflow/network.hpp"

namespace tierflow::oracle {

/// Central differences of `loss` with respect to every entry of `params`,
/// perturbing in place and restoring.
inline std::vector<double> central_differences(std::span<double> params,
                                               const std::function<double()>& loss,
                                               double h = 1e-5) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss();
    params[i] = saved - h;
    const double down = loss();
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Relative agreement with an absolute floor for tiny components.
inline bool gradients_agree(double analytic, double numeric, double rel_tol = 1e-4,
                            double abs_floor = 1e-8) {
  if (std::abs(analytic) < abs_floor) return std::abs(analytic - numeric) < abs_floor;
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return std::abs(analytic - numeric) / scale < rel_tol;
}

/// Scalar Adam written straight from the recurrence.
struct ScalarAdam {
  double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double m = 0.0, v = 0.0;
  int t = 0;

  double step(double param, double grad) {
    t += 1;
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad * grad;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    return param - lr * mhat / (std::sqrt(vhat) + eps);
  }
};

/// Scores sorted ascending, entry floor(p * n / 100).
inline int sorted_percentile(std::vector<int> scores, double p) {
  std::sort(scores.begin(), scores.end());
  auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(scores.size()) / 100.0));
  return scores[std::min(idx, scores.size() - 1)];
}

/// sqrt(sum of squared differences) / count, one element at a time.
inline double brute_force_distance(std::span<const double> a, std::span<const double> b) {
  long double ss = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
    ss += d * d;
  }
  return static_cast<double>(std::sqrt(ss) / static_cast<long double>(a.size()));
}

/// Flattened weights then biases of one layer.
inline std::vector<double> flatten(const DenseLayer& layer) {
  std::vector<double> out(layer.weights().values().begin(), layer.weights().values().end());
  out.insert(out.end(), layer.biases().begin(), layer.biases().end());
  return out;
}

/// Exact chi-square statistic of observed counts against a uniform expectation.
inline double chi_square_uniform(std::span<const std::size_t> counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

}  // namespace tierflow::oracle
