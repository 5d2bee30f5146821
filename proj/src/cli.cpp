#include "tierflow/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "tierflow/checkpoint.hpp"
#include "tierflow/diagnostics.hpp"
#include "tierflow/error.hpp"
#include "tierflow/experiment.hpp"
#include "tierflow/io.hpp"
#include "tierflow/synth.hpp"
#include "tierflow/vae.hpp"

namespace tierflow::cli {

namespace {

using Clock = std::chrono::steady_clock;

nlohmann::json read_config(const std::filesystem::path& path) {
  if (path.empty()) throw ConfigError("--config is required");
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void require_out(const Options& opts) {
  if (opts.out.empty()) throw ConfigError("--out is required");
}

/// Collects output files so the manifest can checksum them.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {}

  void write(const std::string& name, const std::string& content) {
    write_text_file(root_ / name, content);
    checksums_[name] = sha256_hex(content);
  }

  void finish(RunManifest manifest, Clock::time_point started) {
    manifest.outputs = checksums_;
    manifest.duration_seconds =
        std::chrono::duration<double>(Clock::now() - started).count();
    const nlohmann::json doc = {{"command", manifest.command},
                                {"config_digest", manifest.config_digest},
                                {"seed", manifest.seed},
                                {"outputs", manifest.outputs},
                                {"duration_seconds", manifest.duration_seconds}};
    write_text_file(root_ / "manifest.json", doc.dump(2) + "\n");
  }

 private:
  std::filesystem::path root_;
  std::map<std::string, std::string> checksums_;
};

std::string safe_name(const std::string& arm) {
  std::string out;
  for (char c : arm) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return out;
}

ExperimentConfig load_experiment(const Options& opts) {
  auto cfg = experiment_config_from_json(read_config(opts.config), opts.config.parent_path());
  if (opts.seed) cfg.settings.seed = *opts.seed;
  return cfg;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void configure_logging() {
  auto logger = spdlog::get("tierflow");
  if (!logger) logger = spdlog::stderr_logger_st("tierflow");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("TIERFLOW_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

void cmd_synth(const Options& opts) {
  const auto started = Clock::now();
  auto doc = read_config(opts.config);
  if (doc.contains("synth")) doc = doc.at("synth");
  if (opts.seed) doc["seed"] = *opts.seed;
  const auto config = synth_config_from_json(doc);
  const auto resolved = synth_config_to_json(config);
  if (opts.dry_run) {
    std::cout << resolved.dump(2) << "\n";
    return;
  }
  require_out(opts);
  const auto data = synth_generate(config);
  OutputDir out(opts.out);
  out.write("compounds.bits", bitvectors_to_text(data.compounds));
  out.write("proteins.bits", bitvectors_to_text(data.proteins));
  out.write("interactions.tsv", interactions_to_text(data.interactions));
  out.write("oracle.tsv", oracle_to_text(data.oracle));
  spdlog::info("synth: {} compounds, {} proteins, {} interactions", data.compounds.size(),
               data.proteins.size(), data.interactions.size());
  out.finish({"synth", sha256_hex(resolved.dump()), config.seed, {}, 0.0}, started);
}

void cmd_embed(const Options& opts) {
  const auto started = Clock::now();
  const auto doc = read_config(opts.config);
  const auto config = vae_config_from_json(doc);
  std::uint64_t seed = doc.value("seed", std::uint64_t{0});
  if (opts.seed) seed = *opts.seed;
  std::filesystem::path input;
  if (opts.input) {
    input = *opts.input;
  } else if (doc.contains("input")) {
    input = opts.config.parent_path() / doc.at("input").get<std::string>();
  } else {
    throw ConfigError("embed needs --input or an 'input' entry in the config");
  }
  auto resolved = vae_config_to_json(config);
  resolved["seed"] = seed;
  if (opts.dry_run) {
    std::cout << resolved.dump(2) << "\n";
    return;
  }
  require_out(opts);
  const auto store = load_bitvectors(input);
  if (store.width() != config.input_dim) {
    throw DataError(fmt::format("{}: width {} does not match vae input_dim {}", input.string(),
                                store.width(), config.input_dim));
  }
  RngStream rng(seed);
  const auto trained = train_vae(config, store, rng);
  OutputDir out(opts.out);
  out.write("vae.json", vae_to_json(trained.model));
  out.write("latents.tsv", latents_to_text(embed(trained.model, store)));
  out.write("vae_metrics.csv", vae_metrics_csv(trained.log));
  out.finish({"embed", sha256_hex(resolved.dump()), seed, {}, 0.0}, started);
}

void cmd_train(const Options& opts) {
  const auto started = Clock::now();
  const auto config = load_experiment(opts);
  const auto resolved = experiment_config_to_json(config);
  if (opts.dry_run) {
    std::cout << resolved.dump(2) << "\n";
    for (const auto& arm : config.arms) {
      std::cout << "arm " << arm.name << ":";
      for (const auto& s : arm.steps) std::cout << " " << s.tier.label() << "x" << s.epochs;
      std::cout << "\n";
    }
    return;
  }
  require_out(opts);
  const auto data = load_data_context(config);
  const auto report = run_experiment(config, data, opts.jobs);
  OutputDir out(opts.out);
  for (const auto& arm : report.arms) {
    const auto name = safe_name(arm.name);
    out.write("metrics_" + name + ".csv", metrics_csv(arm.name, arm.result.log));
    out.write("checkpoint_" + name + ".json", network_to_json(arm.result.network));
    spdlog::info("arm {}: best val loss {:.6g}, best val accuracy {:.3f}%", arm.name,
                 arm.best.loss, arm.best.accuracy);
  }
  out.write("report.json", report_to_json(report));
  out.finish({"train", sha256_hex(resolved.dump()), config.settings.seed, {}, 0.0}, started);
}

void cmd_diagnose(const Options& opts) {
  const auto started = Clock::now();
  const auto config = load_experiment(opts);
  const ArmSpec* arm = nullptr;
  for (const auto& a : config.arms) {
    const bool named = config.diagnostics_arm && a.name == *config.diagnostics_arm;
    if (named || (!config.diagnostics_arm && !arm && a.steps.size() == 2)) arm = &a;
  }
  if (!arm || arm->steps.size() != 2) {
    throw ConfigError("diagnose needs a 2-step arm (set diagnostics.arm or add one)");
  }
  const std::size_t delta = opts.delta.value_or(config.diagnostics_delta);
  auto resolved = experiment_config_to_json(config);
  resolved["diagnostics"]["arm"] = arm->name;
  resolved["diagnostics"]["delta"] = delta;
  if (opts.dry_run) {
    std::cout << resolved.dump(2) << "\n";
    return;
  }
  require_out(opts);
  const auto data = load_data_context(config);
  const auto result = weight_drift_protocol(config.schedule_for(*arm), delta, data);
  if (!result.shared_prefix) {
    throw NumericError("diagnose: arms diverged before the step boundary");
  }
  OutputDir out(opts.out);
  out.write("weight_drift.csv", weight_drift_csv(result));
  out.finish({"diagnose", sha256_hex(resolved.dump()), config.settings.seed, {}, 0.0}, started);
}

int run(int argc, char** argv) {
  CLI::App app{"Stepwise training across label-confidence tiers"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opts;
  std::string config;
  std::string out;
  std::string input;
  std::uint64_t seed = 0;
  std::size_t delta = 0;
  app.add_option("--config", config, "JSON config file");
  app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--jobs", opts.jobs, "arms trained concurrently")->check(CLI::PositiveNumber);
  app.add_flag("--dry-run", opts.dry_run, "validate and print the resolved plan only");

  auto* synth = app.add_subcommand("synth", "generate a synthetic tiered dataset");
  auto* embed = app.add_subcommand("embed", "train a VAE and write latent features");
  auto* input_opt = embed->add_option("--input", input, "bit-vector file to embed");
  auto* train = app.add_subcommand("train", "run the experiment arms");
  auto* diagnose = app.add_subcommand("diagnose", "per-layer weight drift across the step boundary");
  auto* delta_opt = diagnose->add_option("--delta", delta, "epochs into step 2 to compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }
  opts.config = config;
  opts.out = out;
  if (*seed_opt) opts.seed = seed;
  if (*input_opt) opts.input = input;
  if (*delta_opt) opts.delta = delta;

  configure_logging();
  try {
    if (*synth) cmd_synth(opts);
    if (*embed) cmd_embed(opts);
    if (*train) cmd_train(opts);
    if (*diagnose) cmd_diagnose(opts);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigError;
  } catch (const DataError& e) {
    spdlog::error("data error: {}", e.what());
    return kDataError;
  } catch (const ShapeError& e) {
    spdlog::error("data error: {}", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    spdlog::error("runtime failure: {}", e.what());
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace tierflow::cli
