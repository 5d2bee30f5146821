#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tierflow/ftl.hpp"
#include "tierflow/snapshot.hpp"

namespace tierflow {

struct LayerDistance {
  std::size_t layer_index = 0;
  std::size_t n_weights = 0;  // weights plus biases
  double distance = 0.0;
};

struct LayerDistanceReport {
  std::string from_tag;
  std::string to_tag;
  std::vector<LayerDistance> layers;
};

/// Per layer: ||(W_a, b_a) - (W_b, b_b)||_2 divided by the layer's parameter
/// count. Throws ShapeError when the snapshots' shapes differ.
LayerDistanceReport layer_distance(const WeightSnapshot& a, const WeightSnapshot& b);

/// ftl / baseline per layer; std::nullopt where the baseline distance is 0.
std::vector<std::optional<double>> fold_change(const LayerDistanceReport& ftl,
                                               const LayerDistanceReport& baseline);

struct WeightDriftResult {
  LayerDistanceReport ftl;       // end of step 1 -> `delta` epochs into step 2
  LayerDistanceReport baseline;  // same tier, epoch E1 -> E1 + delta
  std::vector<std::optional<double>> fold_changes;
  bool shared_prefix = false;    // both arms hold identical weights at epoch E1
};

/// Compares how far each layer moves across the step boundary of a two-step
/// schedule against continued training on the first step's tier for the same
/// number of epochs. Both arms share the seed and hence the step-1 trajectory.
///
/// Throws ConfigError unless the schedule has exactly two steps and
/// delta <= step-2 epochs.
WeightDriftResult weight_drift_protocol(const TrainSchedule& schedule, std::size_t delta,
                                        const DataContext& data);

/// `# ftl: a -> b; baseline: c -> d` then
/// `layer,n_weights,dist_ftl,dist_baseline,fold_change` (NA for undefined).
std::string weight_drift_csv(const WeightDriftResult& result);

}  // namespace tierflow
