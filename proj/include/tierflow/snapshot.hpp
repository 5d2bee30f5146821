#pragma once

#include <string>
#include <vector>

#include "tierflow/network.hpp"

namespace tierflow {

/// Copy of a network's layers taken at a named point of training.
struct WeightSnapshot {
  std::string tag;
  std::vector<DenseLayer> layers;

  static WeightSnapshot capture(const DenseNetwork& net, std::string tag) {
    return WeightSnapshot{std::move(tag), net.layers()};
  }

  bool same_weights(const WeightSnapshot& other) const { return layers == other.layers; }
};

}  // namespace tierflow
