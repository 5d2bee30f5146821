#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_helpers.hpp"
#include "tierflow/checkpoint.hpp"
#include "tierflow/cli.hpp"
#include "tierflow/io.hpp"
#include "tierflow/vae.hpp"

using namespace tierflow;
namespace fs = std::filesystem;

namespace {

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "tierflow");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path write_json(const fs::path& path, const nlohmann::json& doc) {
  write_text_file(path, doc.dump(2));
  return path;
}

nlohmann::json synth_doc() { return synth_config_to_json(fixtures::small_synth()); }

nlohmann::json train_doc(const fs::path& data_dir) {
  return {{"data",
           {{"interactions", (data_dir / "interactions.tsv").string()},
            {"compound_features", (data_dir / "compounds.bits").string()},
            {"protein_features", (data_dir / "proteins.bits").string()},
            {"format", "bits"}}},
          {"arms",
           {{{"name", "ftl"},
             {"steps", {{{"tier", {300, 700}}, {"epochs", 3}}, {{"tier", {700, 900}}, {"epochs", 3}}}}},
            {{"name", "high"}, {"steps", {{{"tier", {700, 900}}, {"epochs", 6}}}}}}},
          {"validation_tier", {900, 1000}},
          {"seed", 3},
          {"batch_size", 64},
          {"learning_rate", 0.001},
          {"layer_sizes", {128, 64, 32, 16, 8, 1}},
          {"diagnostics", {{"arm", "ftl"}, {"delta", 2}}}};
}

/// Runs synth once into `dir`/data and returns that directory.
fs::path synth_data(const fs::path& dir) {
  const auto cfg = write_json(dir / "synth.json", synth_doc());
  EXPECT_EQ(invoke({"synth", "--config", cfg.string(), "--out", (dir / "data").string()}), 0);
  return dir / "data";
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { setenv("TIERFLOW_LOG", "error", 1); }
};

}  // namespace

TEST_F(Cli, SynthWritesConfiguredCountsAndIsIdempotent) {
  const auto dir = fixtures::temp_dir("cli_synth");
  const auto data = synth_data(dir);
  const auto first = read_text_file(data / "interactions.tsv");
  EXPECT_EQ(count_lines(first), 240u + 80u + 60u);
  EXPECT_EQ(count_lines(read_text_file(data / "compounds.bits")), 61u);
  EXPECT_EQ(count_lines(read_text_file(data / "oracle.tsv")), 380u);
  EXPECT_TRUE(fs::exists(data / "manifest.json"));
  ASSERT_EQ(invoke({"synth", "--config", (dir / "synth.json").string(), "--out", (dir / "again").string()}), 0);
  for (const char* name : {"interactions.tsv", "compounds.bits", "proteins.bits", "oracle.tsv"}) {
    EXPECT_EQ(read_text_file(data / name), read_text_file(dir / "again" / name)) << name;
  }
}

TEST_F(Cli, SynthRejectsOverlappingTiersBeforeWriting) {
  const auto dir = fixtures::temp_dir("cli_overlap");
  auto doc = synth_doc();
  doc["tiers"][1]["tier"] = {600, 900};
  const auto cfg = write_json(dir / "bad.json", doc);
  EXPECT_EQ(invoke({"synth", "--config", cfg.string(), "--out", (dir / "out").string()}), 1);
  EXPECT_FALSE(fs::exists(dir / "out"));
  EXPECT_EQ(invoke({"synth", "--config", (dir / "missing.json").string(), "--out", "x"}), 1);
  EXPECT_EQ(invoke({"bogus"}), 1);
}

TEST_F(Cli, EmbedWritesCheckpointLatentsAndMetrics) {
  const auto dir = fixtures::temp_dir("cli_embed");
  const auto data = synth_data(dir);
  const nlohmann::json vae = {{"input_dim", 12}, {"encoder_hidden", {8}}, {"latent_dim", 3},
                              {"epochs", 4},     {"batch_size", 16},      {"learning_rate", 0.01},
                              {"seed", 5}};
  const auto cfg = write_json(dir / "vae.json", vae);
  const auto input = (data / "compounds.bits").string();
  ASSERT_EQ(invoke({"embed", "--input", input, "--config", cfg.string(), "--out", (dir / "e1").string()}), 0);
  ASSERT_EQ(invoke({"embed", "--input", input, "--config", cfg.string(), "--out", (dir / "e2").string()}), 0);
  const auto latents = read_text_file(dir / "e1" / "latents.tsv");
  EXPECT_EQ(latents, read_text_file(dir / "e2" / "latents.tsv"));
  EXPECT_EQ(parse_latents(latents).width(), 3u);
  EXPECT_EQ(parse_latents(latents).size(), 60u);
  const auto metrics = read_text_file(dir / "e1" / "vae_metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), "epoch,loss,reconstruction,kl,loss_change");
  EXPECT_EQ(count_lines(metrics), 5u);
  // Width mismatch between config and file.
  EXPECT_EQ(invoke({"embed", "--input", (data / "interactions.tsv").string(), "--config", cfg.string(),
                    "--out", (dir / "e3").string()}),
            2);
}

TEST_F(Cli, EmbedWithZeroEpochsKeepsInitialisation) {
  const auto dir = fixtures::temp_dir("cli_embed0");
  const auto data = synth_data(dir);
  const nlohmann::json vae = {{"input_dim", 12}, {"encoder_hidden", {8}}, {"latent_dim", 3},
                              {"epochs", 0},     {"batch_size", 16},      {"learning_rate", 0.01},
                              {"seed", 5}};
  const auto cfg = write_json(dir / "vae.json", vae);
  ASSERT_EQ(invoke({"embed", "--input", (data / "proteins.bits").string(), "--config", cfg.string(),
                    "--out", (dir / "out").string()}),
            0);
  RngStream rng(5);
  const auto init = build_vae(vae_config_from_json(vae), rng);
  EXPECT_EQ(vae_from_json(read_text_file(dir / "out" / "vae.json")), init);
  EXPECT_EQ(count_lines(read_text_file(dir / "out" / "vae_metrics.csv")), 1u);
}

TEST_F(Cli, EmbedProteinPresetGivesWidth128) {
  const auto dir = fixtures::temp_dir("cli_protein");
  RngStream rng(1);
  BitVectorStore store(5508);
  for (int i = 0; i < 4; ++i) {
    BitVector v(5508);
    for (auto& b : v) b = rng.uniform() < 0.01;
    store.insert("P" + std::to_string(i), v);
  }
  save_bitvectors(store, dir / "proteins.bits");
  const auto cfg = write_json(dir / "vae.json", {{"preset", "protein"}, {"epochs", 1}});
  ASSERT_EQ(invoke({"embed", "--input", (dir / "proteins.bits").string(), "--config", cfg.string(),
                    "--out", (dir / "out").string()}),
            0);
  const auto latents = parse_latents(read_text_file(dir / "out" / "latents.tsv"));
  EXPECT_EQ(latents.width(), 128u);
  EXPECT_EQ(latents.size(), 4u);
}

TEST_F(Cli, TrainIsByteIdenticalAcrossRuns) {
  const auto dir = fixtures::temp_dir("cli_train");
  const auto data = synth_data(dir);
  const auto cfg = write_json(dir / "train.json", train_doc(data));
  ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--out", (dir / "r1").string()}), 0);
  ASSERT_EQ(invoke({"--jobs", "2", "train", "--config", cfg.string(), "--out", (dir / "r2").string()}), 0);
  for (const char* name : {"metrics_ftl.csv", "metrics_high.csv", "checkpoint_ftl.json", "report.json"}) {
    EXPECT_EQ(read_text_file(dir / "r1" / name), read_text_file(dir / "r2" / name)) << name;
  }
  const auto report = nlohmann::json::parse(read_text_file(dir / "r1" / "report.json"));
  EXPECT_TRUE(report.dump().find("best_val_accuracy") != std::string::npos);
  EXPECT_NO_THROW(load_network(dir / "r1" / "checkpoint_ftl.json"));
  // A different seed changes the metrics.
  ASSERT_EQ(invoke({"train", "--seed", "4", "--config", cfg.string(), "--out", (dir / "r3").string()}), 0);
  EXPECT_NE(read_text_file(dir / "r1" / "metrics_ftl.csv"), read_text_file(dir / "r3" / "metrics_ftl.csv"));
}

TEST_F(Cli, DryRunWritesNothing) {
  const auto dir = fixtures::temp_dir("cli_dry");
  const auto cfg = write_json(dir / "train.json", train_doc(dir / "nowhere"));
  testing::internal::CaptureStdout();
  EXPECT_EQ(invoke({"--dry-run", "train", "--config", cfg.string(), "--out", (dir / "out").string()}), 0);
  const auto printed = testing::internal::GetCapturedStdout();
  EXPECT_NE(printed.find("arm ftl: [300,700)x3 [700,900)x3"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out"));
  const auto scfg = write_json(dir / "synth.json", synth_doc());
  testing::internal::CaptureStdout();
  EXPECT_EQ(invoke({"synth", "--dry-run", "--config", scfg.string(), "--out", (dir / "s").string()}), 0);
  testing::internal::GetCapturedStdout();
  EXPECT_FALSE(fs::exists(dir / "s"));
}

TEST_F(Cli, TrainWithMissingDataExitsTwo) {
  const auto dir = fixtures::temp_dir("cli_missing");
  const auto cfg = write_json(dir / "train.json", train_doc(dir / "nowhere"));
  EXPECT_EQ(invoke({"train", "--config", cfg.string(), "--out", (dir / "out").string()}), 2);
}

TEST_F(Cli, TrainWithMismatchedValidationTierExitsOne) {
  const auto dir = fixtures::temp_dir("cli_valtier");
  auto doc = train_doc(dir);
  doc["arms"][0]["validation_tier"] = {950, 1000};
  const auto cfg = write_json(dir / "train.json", doc);
  EXPECT_EQ(invoke({"train", "--config", cfg.string(), "--out", (dir / "out").string()}), 1);
}

TEST_F(Cli, DiagnoseEmitsOneRowPerLayer) {
  const auto dir = fixtures::temp_dir("cli_diag");
  const auto data = synth_data(dir);
  const auto cfg = write_json(dir / "train.json", train_doc(data));
  ASSERT_EQ(invoke({"diagnose", "--config", cfg.string(), "--out", (dir / "d1").string()}), 0);
  ASSERT_EQ(invoke({"diagnose", "--config", cfg.string(), "--out", (dir / "d2").string()}), 0);
  const auto csv = read_text_file(dir / "d1" / "weight_drift.csv");
  EXPECT_EQ(csv, read_text_file(dir / "d2" / "weight_drift.csv"));
  EXPECT_EQ(count_lines(csv), 2u + 6u);

  ASSERT_EQ(invoke({"diagnose", "--delta", "0", "--config", cfg.string(), "--out", (dir / "d0").string()}), 0);
  const auto zero = read_text_file(dir / "d0" / "weight_drift.csv");
  std::size_t rows = 0;
  for (const auto& line : split(zero, '\n')) {
    if (line.empty() || line[0] == '#' || line.rfind("layer,", 0) == 0) continue;
    const auto fields = split(line, ',');
    ASSERT_EQ(fields.size(), 5u);
    double dist = -1.0;
    ASSERT_TRUE(parse_double(fields[2], dist));
    EXPECT_EQ(dist, 0.0);
    ++rows;
  }
  EXPECT_EQ(rows, 6u);
}

TEST_F(Cli, DiagnoseWithoutTwoStepArmExitsOne) {
  const auto dir = fixtures::temp_dir("cli_diag_bad");
  auto doc = train_doc(dir);
  doc["arms"].erase(0);
  doc.erase("diagnostics");
  const auto cfg = write_json(dir / "train.json", doc);
  EXPECT_EQ(invoke({"diagnose", "--config", cfg.string(), "--out", (dir / "out").string()}), 1);
}
