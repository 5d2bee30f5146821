#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tierflow::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kDataError = 2,
  kRuntimeError = 3,
};

struct Options {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::filesystem::path> input;  // embed: bit-vector file
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> delta;            // diagnose: epochs into step 2
  std::size_t jobs = 1;
  bool dry_run = false;
};

/// Written last, atomically, as manifest.json in the output directory.
struct RunManifest {
  std::string command;
  std::string config_digest;  // sha256 of the resolved config
  std::uint64_t seed = 0;
  std::map<std::string, std::string> outputs;  // file name -> sha256
  double duration_seconds = 0.0;
};

std::string sha256_hex(std::string_view bytes);

// Each command throws the library's error types; run() maps them to exit codes.
void cmd_synth(const Options& opts);
void cmd_embed(const Options& opts);
void cmd_train(const Options& opts);
void cmd_diagnose(const Options& opts);

/// Full command-line entry point. Never throws.
int run(int argc, char** argv);

/// Reads TIERFLOW_LOG (error|info|debug) and configures the logger.
void configure_logging();

}  // namespace tierflow::cli
