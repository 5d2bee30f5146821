#include "tierflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tierflow/error.hpp"

namespace tierflow {

namespace {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double apply(Activation act, double z) noexcept {
  switch (act) {
    case Activation::ReLU:
      return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid:
      return sigmoid(z);
    case Activation::Identity:
      return z;
  }
  return z;
}

// Derivative expressed through the activation output.
double derivative_from_output(Activation act, double a) noexcept {
  switch (act) {
    case Activation::ReLU:
      return a > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid:
      return a * (1.0 - a);
    case Activation::Identity:
      return 1.0;
  }
  return 1.0;
}

std::string shape_of(const Tensor2& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

}  // namespace

std::string_view to_string(Activation act) noexcept {
  switch (act) {
    case Activation::ReLU:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Identity:
      return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

DenseLayer::DenseLayer(Tensor2 weights, std::vector<double> biases, Activation activation)
    : weights_(std::move(weights)), biases_(std::move(biases)), activation_(activation) {
  if (weights_.rows() == 0 || weights_.cols() == 0) {
    throw ShapeError("DenseLayer: zero-size weight matrix " + shape_of(weights_));
  }
  if (biases_.size() != weights_.rows()) {
    throw ShapeError("DenseLayer: " + std::to_string(biases_.size()) + " biases for " +
                     std::to_string(weights_.rows()) + " outputs");
  }
}

DenseNetwork::DenseNetwork(std::size_t input_dim, std::vector<DenseLayer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ == 0) throw ShapeError("DenseNetwork: input_dim must be positive");
  if (layers_.empty()) throw ShapeError("DenseNetwork: no layers");
  std::size_t width = input_dim_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].in_dim() != width) {
      throw ShapeError("DenseNetwork: layer " + std::to_string(i) + " expects " +
                       std::to_string(layers_[i].in_dim()) + " inputs, previous width is " +
                       std::to_string(width));
    }
    width = layers_[i].out_dim();
  }
}

std::size_t DenseNetwork::output_dim() const noexcept { return layers_.back().out_dim(); }

std::size_t DenseNetwork::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.parameter_count();
  return n;
}

std::vector<Activation> classifier_activations(std::size_t layer_count) {
  std::vector<Activation> plan(layer_count, Activation::ReLU);
  if (!plan.empty()) plan.back() = Activation::Sigmoid;
  return plan;
}

DenseLayer init_layer(std::size_t in_dim, std::size_t out_dim, Activation activation,
                      RngStream& rng) {
  if (in_dim == 0 || out_dim == 0) {
    throw ShapeError("init_layer: zero-size layer " + std::to_string(out_dim) + "x" +
                     std::to_string(in_dim));
  }
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  Tensor2 w(out_dim, in_dim);
  for (double& v : w.values()) v = (2.0 * rng.uniform() - 1.0) * limit;
  return DenseLayer(std::move(w), std::vector<double>(out_dim, 0.0), activation);
}

DenseNetwork init_network(std::span<const std::size_t> layer_sizes, std::size_t input_dim,
                          std::span<const Activation> activation_plan, RngStream& rng) {
  if (layer_sizes.empty()) throw ShapeError("init_network: no layer sizes");
  if (input_dim == 0) throw ShapeError("init_network: input_dim must be positive");
  if (activation_plan.size() != layer_sizes.size()) {
    throw ShapeError("init_network: " + std::to_string(activation_plan.size()) +
                     " activations for " + std::to_string(layer_sizes.size()) + " layers");
  }
  std::vector<DenseLayer> layers;
  layers.reserve(layer_sizes.size());
  std::size_t width = input_dim;
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    layers.push_back(init_layer(width, layer_sizes[i], activation_plan[i], rng));
    width = layer_sizes[i];
  }
  return DenseNetwork(input_dim, std::move(layers));
}

Tensor2 forward_layer(const DenseLayer& layer, const Tensor2& input) {
  if (input.cols() != layer.in_dim()) {
    throw ShapeError("forward: batch has " + std::to_string(input.cols()) +
                     " columns, layer expects " + std::to_string(layer.in_dim()));
  }
  Tensor2 out = matmul_transposed(input, layer.weights());
  const auto& b = layer.biases();
  const Activation act = layer.activation();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = apply(act, row[j] + b[j]);
  }
  return out;
}

ForwardTrace forward(const DenseNetwork& net, const Tensor2& batch) {
  if (batch.cols() != net.input_dim()) {
    throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                     " columns, network expects " + std::to_string(net.input_dim()));
  }
  ForwardTrace trace;
  trace.activations.reserve(net.layers().size() + 1);
  trace.activations.push_back(batch);
  for (const auto& layer : net.layers()) {
    trace.activations.push_back(forward_layer(layer, trace.activations.back()));
  }
  return trace;
}

LayerBackward backward_layer(const DenseLayer& layer, const Tensor2& input,
                             const Tensor2& output, const Tensor2& output_grad) {
  if (input.cols() != layer.in_dim() || output.cols() != layer.out_dim() ||
      output_grad.cols() != layer.out_dim() || input.rows() != output.rows() ||
      output_grad.rows() != output.rows()) {
    throw ShapeError("backward: activations " + shape_of(input) + " -> " + shape_of(output) +
                     " with gradient " + shape_of(output_grad) + " do not fit layer " +
                     shape_of(layer.weights()));
  }
  // delta = dL/dz
  Tensor2 delta = output_grad;
  const Activation act = layer.activation();
  if (act != Activation::Identity) {
    auto d = delta.values();
    const auto a = output.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= derivative_from_output(act, a[i]);
  }
  LayerBackward result;
  result.params.weights = transposed_matmul(delta, input);
  result.params.biases.assign(layer.out_dim(), 0.0);
  for (std::size_t r = 0; r < delta.rows(); ++r) {
    const auto row = delta.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) result.params.biases[j] += row[j];
  }
  result.input = matmul(delta, layer.weights());
  return result;
}

NetworkGradients backward(const DenseNetwork& net, const ForwardTrace& trace,
                          const Tensor2& loss_gradient) {
  const auto& layers = net.layers();
  if (trace.activations.size() != layers.size() + 1) {
    throw ShapeError("backward: trace holds " + std::to_string(trace.activations.size()) +
                     " activations, network needs " + std::to_string(layers.size() + 1));
  }
  NetworkGradients grads;
  grads.layers.resize(layers.size());
  Tensor2 upstream = loss_gradient;
  for (std::size_t i = layers.size(); i-- > 0;) {
    auto step = backward_layer(layers[i], trace.activations[i], trace.activations[i + 1],
                               upstream);
    grads.layers[i] = std::move(step.params);
    upstream = std::move(step.input);
  }
  grads.input = std::move(upstream);
  return grads;
}

std::vector<std::span<double>> parameter_blocks(DenseNetwork& net) {
  std::vector<std::span<double>> blocks;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    auto& l = net.layer(i);
    blocks.push_back(l.weight_values());
    blocks.push_back(l.bias_values());
  }
  return blocks;
}

std::vector<std::span<double>> parameter_blocks(DenseLayer& layer) {
  return {layer.weight_values(), layer.bias_values()};
}

std::vector<std::span<const double>> gradient_blocks(const NetworkGradients& grads) {
  std::vector<std::span<const double>> blocks;
  for (const auto& g : grads.layers) {
    blocks.push_back(g.weights.values());
    blocks.push_back(g.biases);
  }
  return blocks;
}

std::vector<std::span<const double>> gradient_blocks(const LayerGradients& grads) {
  return {grads.weights.values(), grads.biases};
}

}  // namespace tierflow
