#include "tierflow/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "tierflow/checkpoint.hpp"
#include "tierflow/error.hpp"
#include "tierflow/io.hpp"
#include "tierflow/loss.hpp"

namespace tierflow {

VaeConfig VaeConfig::protein_preset() {
  return VaeConfig{5508, {2048, 512}, 128, 500, 1000, 1e-4};
}

VaeConfig VaeConfig::chemical_preset() {
  return VaeConfig{1024, {256, 128}, 64, 500, 1000, 1e-4};
}

void VaeConfig::validate() const {
  if (input_dim == 0) throw ConfigError("vae.input_dim must be positive");
  if (encoder_hidden.empty()) throw ConfigError("vae.encoder_hidden must not be empty");
  for (auto w : encoder_hidden) {
    if (w == 0) throw ConfigError("vae.encoder_hidden widths must be positive");
  }
  if (latent_dim == 0) throw ConfigError("vae.latent_dim must be positive");
  if (batch_size == 0) throw ConfigError("vae.batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("vae.learning_rate must be positive");
  if (latent_dim > input_dim) {
    spdlog::warn("vae latent_dim {} exceeds input_dim {}", latent_dim, input_dim);
  }
}

VaeConfig vae_config_from_json(const nlohmann::json& doc) {
  VaeConfig c;
  try {
    if (doc.contains("preset")) {
      const auto preset = doc.at("preset").get<std::string>();
      if (preset == "protein") {
        c = VaeConfig::protein_preset();
      } else if (preset == "chemical") {
        c = VaeConfig::chemical_preset();
      } else {
        throw ConfigError("vae.preset must be 'protein' or 'chemical', got '" + preset + "'");
      }
    }
    c.input_dim = doc.value("input_dim", c.input_dim);
    c.encoder_hidden = doc.value("encoder_hidden", c.encoder_hidden);
    c.latent_dim = doc.value("latent_dim", c.latent_dim);
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("vae config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json vae_config_to_json(const VaeConfig& c) {
  return {{"input_dim", c.input_dim},   {"encoder_hidden", c.encoder_hidden},
          {"latent_dim", c.latent_dim}, {"epochs", c.epochs},
          {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate}};
}

VaeModel build_vae(const VaeConfig& config, RngStream& rng) {
  config.validate();
  const auto& hidden = config.encoder_hidden;
  DenseNetwork trunk = init_network(hidden, config.input_dim,
                                    std::vector<Activation>(hidden.size(), Activation::ReLU), rng);
  DenseLayer mu = init_layer(hidden.back(), config.latent_dim, Activation::Identity, rng);
  DenseLayer logvar = init_layer(hidden.back(), config.latent_dim, Activation::Identity, rng);

  std::vector<std::size_t> decoder_sizes(hidden.rbegin(), hidden.rend());
  decoder_sizes.push_back(config.input_dim);
  DenseNetwork decoder = init_network(decoder_sizes, config.latent_dim,
                                      classifier_activations(decoder_sizes.size()), rng);
  return VaeModel{std::move(trunk), std::move(mu), std::move(logvar), std::move(decoder)};
}

std::vector<double> reparameterize(std::span<const double> mu, std::span<const double> logvar,
                                   RngStream& rng) {
  if (mu.size() != logvar.size()) {
    throw ShapeError("reparameterize: " + std::to_string(mu.size()) + " means for " +
                     std::to_string(logvar.size()) + " log-variances");
  }
  std::vector<double> z(mu.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = mu[i] + std::exp(0.5 * logvar[i]) * rng.normal();
  }
  return z;
}

VaeLoss vae_loss(const Tensor2& reconstruction, const Tensor2& input, const Tensor2& mu,
                 const Tensor2& logvar) {
  if (reconstruction.rows() != input.rows() || reconstruction.cols() != input.cols() ||
      mu.rows() != input.rows() || logvar.rows() != mu.rows() || logvar.cols() != mu.cols()) {
    throw ShapeError("vae_loss: operand shapes disagree");
  }
  VaeLoss out;
  const std::size_t n = input.rows();
  if (n == 0) return out;
  double recon = 0.0;
  const auto x = input.values();
  const auto r = reconstruction.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0 && x[i] != 1.0) throw DataError("vae_loss: input entries must be 0 or 1");
    const double p = clamp_probability(r[i]);
    recon -= x[i] == 1.0 ? std::log(p) : std::log1p(-p);
  }
  double kl = 0.0;
  const auto m = mu.values();
  const auto lv = logvar.values();
  for (std::size_t i = 0; i < m.size(); ++i) {
    // expm1(lv) - lv >= 0 analytically; the max guards the last rounding bit.
    kl += 0.5 * (m[i] * m[i] + std::max(0.0, std::expm1(lv[i]) - lv[i]));
  }
  out.reconstruction = recon / static_cast<double>(n);
  out.kl = kl / static_cast<double>(n);
  out.total = out.reconstruction + out.kl;
  return out;
}

VaeStep vae_loss_and_gradients(const VaeModel& model, const Tensor2& input, const Tensor2& noise) {
  const std::size_t n = input.rows();
  const std::size_t latent = model.latent_dim();
  if (noise.rows() != n || noise.cols() != latent) {
    throw ShapeError("vae: noise must be batch x latent_dim");
  }
  const auto trunk_trace = forward(model.encoder_trunk, input);
  const Tensor2& hidden = trunk_trace.output();
  const Tensor2 mu = forward_layer(model.mu_head, hidden);
  const Tensor2 logvar = forward_layer(model.logvar_head, hidden);

  Tensor2 z(n, latent);
  Tensor2 sigma(n, latent);
  for (std::size_t i = 0; i < z.size(); ++i) {
    sigma.values()[i] = std::exp(0.5 * logvar.values()[i]);
    z.values()[i] = mu.values()[i] + sigma.values()[i] * noise.values()[i];
  }
  const auto dec_trace = forward(model.decoder, z);
  const Tensor2& recon = dec_trace.output();

  VaeStep step;
  step.loss = vae_loss(recon, input, mu, logvar);

  const double inv_n = n ? 1.0 / static_cast<double>(n) : 0.0;
  Tensor2 d_recon(recon.rows(), recon.cols());
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double p = clamp_probability(recon.values()[i]);
    d_recon.values()[i] = (p - input.values()[i]) / (p * (1.0 - p)) * inv_n;
  }
  step.grads.decoder = backward(model.decoder, dec_trace, d_recon);
  const Tensor2& dz = step.grads.decoder.input;

  Tensor2 d_mu(n, latent);
  Tensor2 d_logvar(n, latent);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double lv = logvar.values()[i];
    d_mu.values()[i] = dz.values()[i] + mu.values()[i] * inv_n;
    d_logvar.values()[i] = dz.values()[i] * 0.5 * sigma.values()[i] * noise.values()[i] +
                           0.5 * std::expm1(lv) * inv_n;
  }
  auto mu_back = backward_layer(model.mu_head, hidden, mu, d_mu);
  auto lv_back = backward_layer(model.logvar_head, hidden, logvar, d_logvar);
  step.grads.mu_head = std::move(mu_back.params);
  step.grads.logvar_head = std::move(lv_back.params);

  Tensor2 d_hidden = std::move(mu_back.input);
  for (std::size_t i = 0; i < d_hidden.size(); ++i) d_hidden.values()[i] += lv_back.input.values()[i];
  step.grads.trunk = backward(model.encoder_trunk, trunk_trace, d_hidden);
  return step;
}

std::vector<std::span<double>> parameter_blocks(VaeModel& model) {
  auto blocks = parameter_blocks(model.encoder_trunk);
  for (auto b : parameter_blocks(model.mu_head)) blocks.push_back(b);
  for (auto b : parameter_blocks(model.logvar_head)) blocks.push_back(b);
  for (auto b : parameter_blocks(model.decoder)) blocks.push_back(b);
  return blocks;
}

std::vector<std::span<const double>> gradient_blocks(const VaeGradients& grads) {
  auto blocks = gradient_blocks(grads.trunk);
  for (auto b : gradient_blocks(grads.mu_head)) blocks.push_back(b);
  for (auto b : gradient_blocks(grads.logvar_head)) blocks.push_back(b);
  for (auto b : gradient_blocks(grads.decoder)) blocks.push_back(b);
  return blocks;
}

namespace {

Tensor2 gather_rows(const std::vector<const BitVector*>& rows, std::span<const std::size_t> order,
                    std::size_t width) {
  Tensor2 batch(order.size(), width);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& bits = *rows[order[r]];
    auto out = batch.row(r);
    for (std::size_t k = 0; k < width; ++k) out[k] = bits[k];
  }
  return batch;
}

}  // namespace

VaeTrainingResult train_vae(const VaeConfig& config, const BitVectorStore& data, RngStream& rng) {
  config.validate();
  if (data.empty()) throw DataError("train_vae: empty bit-vector store");
  if (data.width() != config.input_dim) {
    throw DataError("train_vae: store width " + std::to_string(data.width()) +
                    " does not match input_dim " + std::to_string(config.input_dim));
  }
  VaeTrainingResult result{build_vae(config, rng), {}};
  auto& model = result.model;

  std::vector<std::size_t> sizes;
  for (auto b : parameter_blocks(model)) sizes.push_back(b.size());
  AdamState adam(AdamConfig{config.learning_rate}, sizes);

  std::vector<const BitVector*> rows;
  for (const auto& [_, bits] : data.entries()) rows.push_back(&bits);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);

  const std::size_t n = rows.size();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    VaeLoss sum;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, n - start);
      const auto idx = std::span<const std::size_t>(order).subspan(start, len);
      const Tensor2 batch = gather_rows(rows, idx, config.input_dim);
      Tensor2 noise(len, model.latent_dim());
      for (double& v : noise.values()) v = rng.normal();
      auto step = vae_loss_and_gradients(model, batch, noise);
      if (!std::isfinite(step.loss.total)) {
        throw NumericError("train_vae: non-finite loss at epoch " + std::to_string(epoch));
      }
      const double w = static_cast<double>(len);
      sum.total += step.loss.total * w;
      sum.reconstruction += step.loss.reconstruction * w;
      sum.kl += step.loss.kl * w;
      const auto params = parameter_blocks(model);
      const auto grads = gradient_blocks(step.grads);
      adam.step(params, grads);
    }
    VaeEpochRecord rec;
    rec.epoch = epoch;
    rec.loss = sum.total / static_cast<double>(n);
    rec.reconstruction = sum.reconstruction / static_cast<double>(n);
    rec.kl = sum.kl / static_cast<double>(n);
    rec.loss_change = result.log.empty() ? 0.0 : rec.loss - result.log.back().loss;
    result.log.push_back(rec);
    spdlog::debug("vae epoch {} loss {:.6g} (recon {:.6g}, kl {:.6g})", epoch, rec.loss,
                  rec.reconstruction, rec.kl);
  }
  return result;
}

LatentStore embed(const VaeModel& model, const BitVectorStore& data) {
  if (data.width() != model.input_dim()) {
    throw DataError("embed: store width " + std::to_string(data.width()) +
                    " does not match model input_dim " + std::to_string(model.input_dim()));
  }
  LatentStore out(model.latent_dim());
  std::vector<const BitVector*> rows;
  std::vector<const std::string*> ids;
  for (const auto& [id, bits] : data.entries()) {
    rows.push_back(&bits);
    ids.push_back(&id);
  }
  constexpr std::size_t kChunk = 1024;
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t start = 0; start < rows.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, rows.size() - start);
    const auto idx = std::span<const std::size_t>(order).subspan(start, len);
    const Tensor2 batch = gather_rows(rows, idx, model.input_dim());
    const Tensor2 hidden = forward(model.encoder_trunk, batch).output();
    const Tensor2 mu = forward_layer(model.mu_head, hidden);
    for (std::size_t r = 0; r < len; ++r) {
      const auto row = mu.row(r);
      out.insert(*ids[start + r], std::vector<double>(row.begin(), row.end()));
    }
  }
  return out;
}

std::string vae_metrics_csv(const std::vector<VaeEpochRecord>& log) {
  std::string out = "epoch,loss,reconstruction,kl,loss_change\n";
  for (const auto& r : log) {
    out += std::to_string(r.epoch) + ',' + format_metric(r.loss) + ',' +
           format_metric(r.reconstruction) + ',' + format_metric(r.kl) + ',' +
           format_metric(r.loss_change) + '\n';
  }
  return out;
}

std::string vae_to_json(const VaeModel& model) {
  std::string out = "{\"vae\":{\"latent_dim\":" + std::to_string(model.latent_dim());
  out += ",\n\"trunk\":";
  detail::append_network_json(out, model.encoder_trunk);
  out += ",\n\"mu_head\":";
  detail::append_layer_json(out, model.mu_head);
  out += ",\n\"logvar_head\":";
  detail::append_layer_json(out, model.logvar_head);
  out += ",\n\"decoder\":";
  detail::append_network_json(out, model.decoder);
  out += "}}\n";
  return out;
}

VaeModel vae_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("vae checkpoint: ") + e.what());
  }
  if (!doc.contains("vae")) throw DataError("vae checkpoint: missing 'vae' envelope");
  const auto& v = doc.at("vae");
  try {
    VaeModel model{network_from_json(v.at("trunk")), detail::layer_from_json(v.at("mu_head")),
                   detail::layer_from_json(v.at("logvar_head")), network_from_json(v.at("decoder"))};
    const auto hidden = model.encoder_trunk.output_dim();
    if (model.mu_head.in_dim() != hidden || model.logvar_head.in_dim() != hidden ||
        model.logvar_head.out_dim() != model.mu_head.out_dim() ||
        model.decoder.input_dim() != model.latent_dim() ||
        model.decoder.output_dim() != model.input_dim()) {
      throw DataError("vae checkpoint: component shapes do not connect");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("vae checkpoint: ") + e.what());
  }
}

}  // namespace tierflow
