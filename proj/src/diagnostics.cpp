#include "tierflow/diagnostics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "tierflow/error.hpp"
#include "tierflow/io.hpp"

namespace tierflow {

LayerDistanceReport layer_distance(const WeightSnapshot& a, const WeightSnapshot& b) {
  if (a.layers.size() != b.layers.size()) {
    throw ShapeError(fmt::format("layer_distance: {} vs {} layers", a.layers.size(),
                                 b.layers.size()));
  }
  LayerDistanceReport report{a.tag, b.tag, {}};
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const auto& la = a.layers[i];
    const auto& lb = b.layers[i];
    if (la.weights().rows() != lb.weights().rows() || la.weights().cols() != lb.weights().cols()) {
      throw ShapeError(fmt::format("layer_distance: layer {} shapes differ", i));
    }
    double ss = 0.0;
    const auto wa = la.weights().values();
    const auto wb = lb.weights().values();
    for (std::size_t k = 0; k < wa.size(); ++k) ss += (wa[k] - wb[k]) * (wa[k] - wb[k]);
    for (std::size_t k = 0; k < la.biases().size(); ++k) {
      const double d = la.biases()[k] - lb.biases()[k];
      ss += d * d;
    }
    const std::size_t n = la.parameter_count();
    report.layers.push_back({i, n, std::sqrt(ss) / static_cast<double>(n)});
  }
  return report;
}

std::vector<std::optional<double>> fold_change(const LayerDistanceReport& ftl,
                                               const LayerDistanceReport& baseline) {
  if (ftl.layers.size() != baseline.layers.size()) {
    throw ShapeError("fold_change: reports cover different layer counts");
  }
  std::vector<std::optional<double>> ratios;
  for (std::size_t i = 0; i < ftl.layers.size(); ++i) {
    if (ftl.layers[i].n_weights != baseline.layers[i].n_weights) {
      throw ShapeError(fmt::format("fold_change: layer {} sizes differ", i));
    }
    const double base = baseline.layers[i].distance;
    if (base > 0.0) {
      ratios.emplace_back(ftl.layers[i].distance / base);
    } else {
      ratios.emplace_back(std::nullopt);
    }
  }
  return ratios;
}

WeightDriftResult weight_drift_protocol(const TrainSchedule& schedule, std::size_t delta,
                                        const DataContext& data) {
  if (schedule.steps.size() != 2) {
    throw ConfigError(fmt::format("weight drift needs a 2-step schedule, got {} steps",
                                  schedule.steps.size()));
  }
  if (delta > schedule.steps[1].epochs) {
    throw ConfigError(fmt::format("delta {} exceeds the {} epochs of step 2", delta,
                                  schedule.steps[1].epochs));
  }
  const std::size_t e1 = schedule.steps[0].epochs;

  const EpochRef ftl_from{1, e1};
  const EpochRef ftl_to{2, delta};
  const std::vector<EpochRef> ftl_requests{ftl_from, ftl_to};
  const auto ftl = train_ftl(schedule, data, ftl_requests);

  const EpochRef base_from{1, e1};
  const EpochRef base_to{1, e1 + delta};
  const std::vector<EpochRef> base_requests{base_from, base_to};
  const auto base = train_single(schedule.steps[0].tier, e1 + delta, data, schedule.settings,
                                 base_requests);

  WeightDriftResult out;
  out.ftl = layer_distance(ftl.snapshot(ftl_from), ftl.snapshot(ftl_to));
  out.baseline = layer_distance(base.snapshot(base_from), base.snapshot(base_to));
  out.fold_changes = fold_change(out.ftl, out.baseline);
  out.shared_prefix = ftl.snapshot(ftl_from).same_weights(base.snapshot(base_from));
  return out;
}

std::string weight_drift_csv(const WeightDriftResult& r) {
  std::string out = fmt::format("# ftl: {} -> {}; baseline: {} -> {}\n", r.ftl.from_tag,
                                r.ftl.to_tag, r.baseline.from_tag, r.baseline.to_tag);
  out += "layer,n_weights,dist_ftl,dist_baseline,fold_change\n";
  for (std::size_t i = 0; i < r.ftl.layers.size(); ++i) {
    const auto& f = r.ftl.layers[i];
    out += fmt::format("{},{},{},{},{}\n", f.layer_index, f.n_weights, format_exact(f.distance),
                       format_exact(r.baseline.layers[i].distance),
                       r.fold_changes[i] ? format_exact(*r.fold_changes[i]) : std::string("NA"));
  }
  return out;
}

}  // namespace tierflow
