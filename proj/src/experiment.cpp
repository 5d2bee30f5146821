#include "tierflow/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "tierflow/error.hpp"
#include "tierflow/io.hpp"

namespace tierflow {

namespace {

TierSpec tier_from_json(const nlohmann::json& doc, const std::string& where) {
  if (!doc.is_array() || doc.size() != 2) throw ConfigError(where + " must be [lo, hi]");
  return TierSpec::make(doc[0].get<int>(), doc[1].get<int>());
}

nlohmann::json tier_to_json(TierSpec t) { return {t.lo, t.hi}; }

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (data.has_value() == synth.has_value()) {
    throw ConfigError("experiment needs exactly one of 'data' or 'synth'");
  }
  if (arms.empty()) throw ConfigError("experiment has no arms");
  std::set<std::string> names;
  for (const auto& arm : arms) {
    if (arm.name.empty()) throw ConfigError("arm with empty name");
    if (!names.insert(arm.name).second) throw ConfigError("duplicate arm name '" + arm.name + "'");
    if (arm.validation_tier && *arm.validation_tier != settings.validation_tier) {
      throw ConfigError("arm '" + arm.name + "' validation tier " + arm.validation_tier->label() +
                        " differs from the experiment's " + settings.validation_tier.label());
    }
    try {
      schedule_for(arm).validate();
    } catch (const ConfigError& e) {
      throw ConfigError("arm '" + arm.name + "': " + e.what());
    }
  }
  if (diagnostics_arm && !names.count(*diagnostics_arm)) {
    throw ConfigError("diagnostics.arm '" + *diagnostics_arm + "' is not an arm");
  }
}

TrainSchedule ExperimentConfig::schedule_for(const ArmSpec& arm) const {
  return TrainSchedule{arm.steps, settings};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc,
                                             const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  try {
    if (doc.contains("data")) {
      const auto& d = doc.at("data");
      DataPaths paths;
      paths.interactions = resolve_path(base_dir, d.at("interactions").get<std::string>());
      paths.compound_features = resolve_path(base_dir, d.at("compound_features").get<std::string>());
      paths.protein_features = resolve_path(base_dir, d.at("protein_features").get<std::string>());
      const auto format = d.value("format", std::string("latent"));
      if (format == "latent") {
        paths.format = FeatureFormat::Latent;
      } else if (format == "bits") {
        paths.format = FeatureFormat::Bits;
      } else {
        throw ConfigError("data.format must be 'latent' or 'bits', got '" + format + "'");
      }
      c.data = paths;
    }
    if (doc.contains("synth")) c.synth = synth_config_from_json(doc.at("synth"));
    if (doc.contains("validation_tier")) {
      c.settings.validation_tier = tier_from_json(doc.at("validation_tier"), "validation_tier");
    }
    c.settings.seed = doc.value("seed", c.settings.seed);
    c.settings.batch_size = doc.value("batch_size", c.settings.batch_size);
    c.settings.learning_rate = doc.value("learning_rate", c.settings.learning_rate);
    c.settings.reset_optimizer_between_steps =
        doc.value("reset_optimizer_between_steps", c.settings.reset_optimizer_between_steps);
    c.settings.layer_sizes = doc.value("layer_sizes", c.settings.layer_sizes);
    const auto& arms = doc.at("arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const auto& a = arms[i];
      ArmSpec arm;
      arm.name = a.at("name").get<std::string>();
      const auto& steps = a.at("steps");
      for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto where = fmt::format("arms[{}].steps[{}]", i, k);
        arm.steps.push_back({tier_from_json(steps[k].at("tier"), where + ".tier"),
                             steps[k].at("epochs").get<std::size_t>()});
      }
      if (a.contains("validation_tier")) {
        arm.validation_tier =
            tier_from_json(a.at("validation_tier"), fmt::format("arms[{}].validation_tier", i));
      }
      c.arms.push_back(std::move(arm));
    }
    if (doc.contains("diagnostics")) {
      const auto& d = doc.at("diagnostics");
      if (d.contains("arm")) c.diagnostics_arm = d.at("arm").get<std::string>();
      c.diagnostics_delta = d.value("delta", c.diagnostics_delta);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json doc;
  if (c.data) {
    doc["data"] = {{"interactions", c.data->interactions.string()},
                   {"compound_features", c.data->compound_features.string()},
                   {"protein_features", c.data->protein_features.string()},
                   {"format", c.data->format == FeatureFormat::Bits ? "bits" : "latent"}};
  }
  if (c.synth) doc["synth"] = synth_config_to_json(*c.synth);
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& a : c.arms) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : a.steps) steps.push_back({{"tier", tier_to_json(s.tier)}, {"epochs", s.epochs}});
    arms.push_back({{"name", a.name}, {"steps", steps}});
  }
  doc["arms"] = arms;
  doc["validation_tier"] = tier_to_json(c.settings.validation_tier);
  doc["seed"] = c.settings.seed;
  doc["batch_size"] = c.settings.batch_size;
  doc["learning_rate"] = c.settings.learning_rate;
  doc["reset_optimizer_between_steps"] = c.settings.reset_optimizer_between_steps;
  doc["layer_sizes"] = c.settings.layer_sizes;
  nlohmann::json diag = {{"delta", c.diagnostics_delta}};
  if (c.diagnostics_arm) diag["arm"] = *c.diagnostics_arm;
  doc["diagnostics"] = diag;
  return doc;
}

DataContext data_context_from_synth(const SynthDataset& synth) {
  return DataContext{synth.interactions, latents_from_bits(synth.compounds),
                     latents_from_bits(synth.proteins)};
}

DataContext load_data_context(const ExperimentConfig& config) {
  if (config.synth) return data_context_from_synth(synth_generate(*config.synth));
  const auto& paths = *config.data;
  auto interactions = load_interactions(paths.interactions);
  if (paths.format == FeatureFormat::Bits) {
    return DataContext{std::move(interactions),
                       latents_from_bits(load_bitvectors(paths.compound_features)),
                       latents_from_bits(load_bitvectors(paths.protein_features))};
  }
  return DataContext{std::move(interactions), load_latents(paths.compound_features),
                     load_latents(paths.protein_features)};
}

const ArmResult& ExperimentReport::arm(const std::string& name) const {
  for (const auto& a : arms) {
    if (a.name == name) return a;
  }
  throw std::out_of_range("no arm named " + name);
}

ExperimentReport run_experiment(const ExperimentConfig& config, const DataContext& data,
                                std::size_t jobs) {
  config.validate();
  std::vector<ArmSpec> arms = config.arms;
  std::sort(arms.begin(), arms.end(), [](const auto& a, const auto& b) { return a.name < b.name; });

  std::vector<std::optional<FtlResult>> results(arms.size());
  std::vector<std::exception_ptr> errors(arms.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < arms.size(); i = next++) {
      try {
        results[i] = train_ftl(config.schedule_for(arms[i]), data);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, arms.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentReport report;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    auto best = results[i]->log.best_validation();
    report.arms.push_back({arms[i].name, std::move(*results[i]), best});
  }
  for (std::size_t i = 0; i < report.arms.size(); ++i) {
    for (std::size_t j = i + 1; j < report.arms.size(); ++j) {
      const auto& a = report.arms[i];
      const auto& b = report.arms[j];
      report.deltas.push_back({a.name, b.name, b.best.loss - a.best.loss,
                               b.best.accuracy - a.best.accuracy});
    }
  }
  return report;
}

std::string metrics_csv(const std::string& arm, const MetricsLog& log) {
  std::string out = "arm,step,epoch,split,loss,accuracy\n";
  for (const auto& r : log.records()) {
    out += fmt::format("{},{},{},{},{},{}\n", arm, r.step, r.epoch, to_string(r.split),
                       format_metric(r.loss), format_metric(r.accuracy));
  }
  return out;
}

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::json arms = nlohmann::json::object();
  for (const auto& a : report.arms) {
    arms[a.name] = {
        {"best_val_loss", a.best.loss},
        {"best_val_accuracy", a.best.accuracy},
        {"epoch_of_best",
         {{"loss", {{"step", a.best.loss_at.step}, {"epoch", a.best.loss_at.epoch}}},
          {"accuracy", {{"step", a.best.accuracy_at.step}, {"epoch", a.best.accuracy_at.epoch}}}}}};
  }
  nlohmann::json deltas = nlohmann::json::array();
  for (const auto& d : report.deltas) {
    deltas.push_back({{"a", d.a},
                      {"b", d.b},
                      {"best_val_loss_delta", d.loss_delta},
                      {"best_val_accuracy_delta", d.accuracy_delta}});
  }
  nlohmann::json doc = {{"arms", arms}, {"deltas", deltas}};
  return doc.dump(2) + "\n";
}

}  // namespace tierflow
