#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tierflow/ftl.hpp"
#include "tierflow/synth.hpp"

namespace tierflow {

struct ArmSpec {
  std::string name;
  std::vector<TrainStep> steps;
  std::optional<TierSpec> validation_tier;  // must match the experiment's when given
};

enum class FeatureFormat { Bits, Latent };

struct DataPaths {
  std::filesystem::path interactions;
  std::filesystem::path compound_features;
  std::filesystem::path protein_features;
  FeatureFormat format = FeatureFormat::Latent;
};

/// Experiment config (JSON):
///   {"data": {"interactions": "...", "compound_features": "...",
///             "protein_features": "...", "format": "latent" | "bits"}
///    or "synth": {<synth config>},
///    "arms": [{"name": "...", "steps": [{"tier": [lo, hi], "epochs": n}]}],
///    "validation_tier": [900, 1000], "seed": 0, "batch_size": 1000,
///    "learning_rate": 0.001, "reset_optimizer_between_steps": false,
///    "layer_sizes": [128, 64, 32, 16, 8, 1],
///    "diagnostics": {"arm": "...", "delta": 20}}
/// Relative data paths resolve against the config file's directory.
struct ExperimentConfig {
  std::optional<DataPaths> data;
  std::optional<SynthConfig> synth;
  std::vector<ArmSpec> arms;
  TrainSettings settings;
  std::optional<std::string> diagnostics_arm;
  std::size_t diagnostics_delta = 20;

  /// Throws ConfigError.
  void validate() const;
  TrainSchedule schedule_for(const ArmSpec& arm) const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc,
                                             const std::filesystem::path& base_dir = {});
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

/// Reads the data files or generates the synthetic set. Throws DataError.
DataContext load_data_context(const ExperimentConfig& config);
/// Raw synthetic bits as features.
DataContext data_context_from_synth(const SynthDataset& synth);

struct ArmResult {
  std::string name;
  FtlResult result;
  BestValidation best;
};

struct ArmDelta {
  std::string a;
  std::string b;
  double loss_delta = 0.0;      // best_val_loss(b) - best_val_loss(a)
  double accuracy_delta = 0.0;  // best_val_accuracy(b) - best_val_accuracy(a)
};

struct ExperimentReport {
  std::vector<ArmResult> arms;  // sorted by name
  std::vector<ArmDelta> deltas;  // every pair (a < b by name)

  const ArmResult& arm(const std::string& name) const;
};

/// Runs every arm with the shared seed and validation set. Arms are
/// independent, so up to `jobs` of them run concurrently.
ExperimentReport run_experiment(const ExperimentConfig& config, const DataContext& data,
                                std::size_t jobs = 1);

/// Header `arm,step,epoch,split,loss,accuracy`; 9 significant digits.
std::string metrics_csv(const std::string& arm, const MetricsLog& log);
std::string report_to_json(const ExperimentReport& report);

}  // namespace tierflow
