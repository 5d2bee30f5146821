#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "tierflow/adam.hpp"
#include "tierflow/features.hpp"
#include "tierflow/interactions.hpp"
#include "tierflow/network.hpp"
#include "tierflow/snapshot.hpp"

namespace tierflow {

struct TrainStep {
  TierSpec tier;
  std::size_t epochs = 0;

  bool operator==(const TrainStep&) const = default;
};

/// Settings shared by every step of a run.
struct TrainSettings {
  TierSpec validation_tier{900, 1000};
  std::size_t batch_size = 1000;
  double learning_rate = 0.001;
  std::uint64_t seed = 0;
  bool reset_optimizer_between_steps = false;
  std::vector<std::size_t> layer_sizes{128, 64, 32, 16, 8, 1};
};

struct TrainSchedule {
  std::vector<TrainStep> steps;
  TrainSettings settings;

  /// Throws ConfigError: empty schedule, zero-epoch step, zero batch size,
  /// a training tier overlapping the validation tier, or a non-scalar output.
  void validate() const;
};

enum class Split { Train, Validation };

std::string_view to_string(Split split) noexcept;

struct MetricRecord {
  std::size_t step = 0;   // 1-based
  std::size_t epoch = 0;  // 1-based within the step
  Split split = Split::Train;
  double loss = 0.0;
  double accuracy = 0.0;  // percent

  bool operator==(const MetricRecord&) const = default;
};

struct EpochRef {
  std::size_t step = 0;
  std::size_t epoch = 0;

  bool operator==(const EpochRef&) const = default;
};

struct BestValidation {
  double loss = 0.0;
  EpochRef loss_at;
  double accuracy = 0.0;
  EpochRef accuracy_at;
};

/// Per-epoch metrics in execution order; (step, epoch, split) is unique.
class MetricsLog {
 public:
  /// Throws std::logic_error on a repeated (step, epoch, split).
  void append(const MetricRecord& record);

  const std::vector<MetricRecord>& records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }

  /// Minimum loss and maximum accuracy over validation records, picked
  /// independently; the earliest epoch wins ties. Throws on an empty log.
  BestValidation best_validation() const;

  bool operator==(const MetricsLog& other) const { return records_ == other.records_; }

 private:
  std::vector<MetricRecord> records_;
  std::set<std::tuple<std::size_t, std::size_t, int>> keys_;
};

/// Everything a run reads: the positive table and per-entity features. The
/// entity lists are the universe negatives are drawn from.
struct DataContext {
  InteractionTable interactions;
  LatentStore compound_features;
  LatentStore protein_features;

  std::size_t feature_width() const noexcept {
    return protein_features.width() + compound_features.width();
  }
};

/// Optional hooks for auditing what training touches.
class TrainingObserver {
 public:
  virtual ~TrainingObserver() = default;
  virtual void on_validation_set(std::span<const LabeledPair> /*pairs*/) {}
  virtual void on_step_data(std::size_t /*step*/, std::span<const LabeledPair> /*examples*/) {}
  virtual void on_batch(std::size_t /*step*/, std::size_t /*epoch*/,
                        std::span<const LabeledPair* const> /*batch*/) {}
};

struct FtlResult {
  DenseNetwork network;
  MetricsLog log;
  /// Tagged "step{k}_epoch{e}"; always includes every step's start (epoch 0)
  /// and end, plus any requested points, in capture order.
  std::vector<WeightSnapshot> snapshots;

  const WeightSnapshot& snapshot(EpochRef at) const;
};

std::string snapshot_tag(EpochRef at);

/// Positives of the validation tier plus an equal number of negatives drawn
/// once from a dedicated seed stream.
std::vector<LabeledPair> build_validation_set(const DataContext& data, const TrainSettings& settings);

/// Stepwise training: step 1 starts from a fresh network, later steps
/// continue from the previous weights (and Adam state unless the reset flag
/// is set). Each step trains on its tier's positives plus fresh 1:1
/// negatives and is validated after every epoch.
FtlResult train_ftl(const TrainSchedule& schedule, const DataContext& data,
                    std::span<const EpochRef> snapshot_requests = {},
                    TrainingObserver* observer = nullptr);

/// Single-tier baseline from a fresh network.
FtlResult train_single(TierSpec tier, std::size_t epochs, const DataContext& data,
                       const TrainSettings& settings, std::span<const EpochRef> snapshot_requests = {},
                       TrainingObserver* observer = nullptr);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean BCE and accuracy at threshold 0.5. Throws on an empty set.
Evaluation evaluate(const DenseNetwork& net, std::span<const LabeledPair> pairs,
                    const DataContext& data);

}  // namespace tierflow
