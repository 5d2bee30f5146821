#pragma once

#include <span>

#include "tierflow/tensor.hpp"

namespace tierflow {

/// Predictions are clamped to [kProbClamp, 1 - kProbClamp] before any log.
inline constexpr double kProbClamp = 1e-12;

double clamp_probability(double p) noexcept;

struct BceResult {
  double loss = 0.0;
  Tensor2 gradient;  // dL/d(predictions), same shape as predictions
};

/// Mean binary cross-entropy over an n×1 prediction column.
///
/// loss = -mean[y ln p + (1 - y) ln(1 - p)] with p clamped. The gradient is
/// taken with respect to the clamped prediction and already carries the 1/n.
BceResult bce_loss(const Tensor2& predictions, std::span<const double> labels);

/// Percentage of rows where [p >= threshold] equals the label.
double accuracy(const Tensor2& predictions, std::span<const double> labels,
                double threshold = 0.5);

}  // namespace tierflow
