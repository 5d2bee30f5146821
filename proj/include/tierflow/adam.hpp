#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tierflow/network.hpp"

namespace tierflow {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

/// Adam moments for a fixed list of parameter blocks.
///
/// Per element, with t incremented first:
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g²
///   p -= lr · (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
class AdamState {
 public:
  AdamState(AdamConfig config, std::span<const std::size_t> block_sizes);

  static AdamState for_network(const DenseNetwork& net, AdamConfig config);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t t() const noexcept { return t_; }
  std::size_t block_count() const noexcept { return m_.size(); }
  std::span<const double> first_moment(std::size_t block) const { return m_.at(block); }
  std::span<const double> second_moment(std::size_t block) const { return v_.at(block); }

  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads);

  bool operator==(const AdamState&) const = default;

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

void adam_step(AdamState& state, DenseNetwork& net, const NetworkGradients& grads);

}  // namespace tierflow
