#include "tierflow/adam.hpp"

#include <cmath>
#include <string>

#include "tierflow/error.hpp"

namespace tierflow {

AdamState::AdamState(AdamConfig config, std::span<const std::size_t> block_sizes)
    : config_(config) {
  if (!(config_.beta1 > 0.0 && config_.beta1 < 1.0) ||
      !(config_.beta2 > 0.0 && config_.beta2 < 1.0)) {
    throw ConfigError("AdamState: beta1 and beta2 must lie in (0, 1)");
  }
  if (!(config_.learning_rate > 0.0) || !(config_.epsilon > 0.0)) {
    throw ConfigError("AdamState: learning rate and epsilon must be positive");
  }
  for (std::size_t n : block_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

AdamState AdamState::for_network(const DenseNetwork& net, AdamConfig config) {
  std::vector<std::size_t> sizes;
  for (const auto& l : net.layers()) {
    sizes.push_back(l.weights().size());
    sizes.push_back(l.biases().size());
  }
  return AdamState(config, sizes);
}

void AdamState::step(std::span<const std::span<double>> params,
                     std::span<const std::span<const double>> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("adam_step: expected " + std::to_string(m_.size()) + " blocks, got " +
                     std::to_string(params.size()) + " params and " +
                     std::to_string(grads.size()) + " grads");
  }
  for (std::size_t b = 0; b < m_.size(); ++b) {
    if (params[b].size() != m_[b].size() || grads[b].size() != m_[b].size()) {
      throw ShapeError("adam_step: block " + std::to_string(b) + " size mismatch");
    }
  }
  ++t_;
  const double t = static_cast<double>(t_);
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (std::size_t b = 0; b < m_.size(); ++b) {
    auto& m = m_[b];
    auto& v = v_[b];
    auto p = params[b];
    auto g = grads[b];
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void adam_step(AdamState& state, DenseNetwork& net, const NetworkGradients& grads) {
  const auto params = parameter_blocks(net);
  const auto g = gradient_blocks(grads);
  state.step(params, g);
}

}  // namespace tierflow
