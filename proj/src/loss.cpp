#include "tierflow/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tierflow/error.hpp"

namespace tierflow {

namespace {

void check_inputs(const Tensor2& predictions, std::span<const double> labels,
                  const char* who) {
  if (predictions.cols() != 1) {
    throw ShapeError(std::string(who) + ": predictions must be a single column");
  }
  if (predictions.rows() != labels.size()) {
    throw ShapeError(std::string(who) + ": " + std::to_string(predictions.rows()) +
                     " predictions for " + std::to_string(labels.size()) + " labels");
  }
}

}  // namespace

double clamp_probability(double p) noexcept {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

BceResult bce_loss(const Tensor2& predictions, std::span<const double> labels) {
  check_inputs(predictions, labels, "bce_loss");
  BceResult result;
  result.gradient = Tensor2(predictions.rows(), 1);
  const std::size_t n = labels.size();
  if (n == 0) return result;
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = labels[i];
    const double p = clamp_probability(predictions(i, 0));
    total -= y * std::log(p) + (1.0 - y) * std::log1p(-p);
    result.gradient(i, 0) = (p - y) / (p * (1.0 - p)) * inv_n;
  }
  result.loss = total * inv_n;
  return result;
}

double accuracy(const Tensor2& predictions, std::span<const double> labels, double threshold) {
  check_inputs(predictions, labels, "accuracy");
  if (labels.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double predicted = predictions(i, 0) >= threshold ? 1.0 : 0.0;
    if (predicted == labels[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace tierflow
