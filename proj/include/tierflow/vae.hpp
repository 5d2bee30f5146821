#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tierflow/adam.hpp"
#include "tierflow/bitvector.hpp"
#include "tierflow/features.hpp"
#include "tierflow/network.hpp"
#include "tierflow/rng.hpp"

namespace tierflow {

struct VaeConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> encoder_hidden;
  std::size_t latent_dim = 0;
  std::size_t epochs = 500;
  std::size_t batch_size = 1000;
  double learning_rate = 1e-4;

  /// 5508 Pfam bits -> [2048, 512] -> 128 latents.
  static VaeConfig protein_preset();
  /// 1024 fingerprint bits -> [256, 128] -> 64 latents.
  static VaeConfig chemical_preset();

  /// Throws ConfigError. A latent wider than the input only logs a warning.
  void validate() const;
};

/// Accepts {"preset": "protein"|"chemical"} with optional overrides, or all
/// fields spelled out.
VaeConfig vae_config_from_json(const nlohmann::json& doc);
nlohmann::json vae_config_to_json(const VaeConfig& config);

/// Encoder trunk feeding two parallel linear heads (mean and log-variance),
/// and a decoder mirroring the trunk with a sigmoid output.
struct VaeModel {
  DenseNetwork encoder_trunk;
  DenseLayer mu_head;
  DenseLayer logvar_head;
  DenseNetwork decoder;

  std::size_t input_dim() const noexcept { return encoder_trunk.input_dim(); }
  std::size_t latent_dim() const noexcept { return mu_head.out_dim(); }

  bool operator==(const VaeModel&) const = default;
};

VaeModel build_vae(const VaeConfig& config, RngStream& rng);

/// z = mu + exp(logvar / 2) * eta with eta ~ N(0, 1) drawn from rng.
std::vector<double> reparameterize(std::span<const double> mu, std::span<const double> logvar,
                                   RngStream& rng);

struct VaeLoss {
  double total = 0.0;
  double reconstruction = 0.0;  // mean over samples of summed per-bit BCE
  double kl = 0.0;              // mean over samples of KL(q || N(0, I))
};

/// Throws DataError when `input` holds anything other than 0 or 1.
VaeLoss vae_loss(const Tensor2& reconstruction, const Tensor2& input, const Tensor2& mu,
                 const Tensor2& logvar);

struct VaeGradients {
  NetworkGradients trunk;
  LayerGradients mu_head;
  LayerGradients logvar_head;
  NetworkGradients decoder;
};

struct VaeStep {
  VaeLoss loss;
  VaeGradients grads;
};

/// Loss and parameter gradients for one batch with the noise held fixed.
VaeStep vae_loss_and_gradients(const VaeModel& model, const Tensor2& input, const Tensor2& noise);

std::vector<std::span<double>> parameter_blocks(VaeModel& model);
std::vector<std::span<const double>> gradient_blocks(const VaeGradients& grads);

struct VaeEpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
  double loss_change = 0.0;  // loss minus the previous epoch's loss; 0 for epoch 1

  bool operator==(const VaeEpochRecord&) const = default;
};

struct VaeTrainingResult {
  VaeModel model;
  std::vector<VaeEpochRecord> log;
};

/// Throws DataError on an empty store or a width mismatch.
VaeTrainingResult train_vae(const VaeConfig& config, const BitVectorStore& data, RngStream& rng);

/// Posterior means for every vector in the store. Consumes no randomness.
LatentStore embed(const VaeModel& model, const BitVectorStore& data);

/// Header `epoch,loss,reconstruction,kl,loss_change`.
std::string vae_metrics_csv(const std::vector<VaeEpochRecord>& log);

// {"vae": {"latent_dim": L, "trunk": <network>, "mu_head": <layer>,
//          "logvar_head": <layer>, "decoder": <network>}}
std::string vae_to_json(const VaeModel& model);
VaeModel vae_from_json(std::string_view text);

}  // namespace tierflow
