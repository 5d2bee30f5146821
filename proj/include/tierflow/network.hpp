#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "tierflow/rng.hpp"
#include "tierflow/tensor.hpp"

namespace tierflow {

enum class Activation { ReLU, Sigmoid, Identity };

std::string_view to_string(Activation act) noexcept;
/// Accepts "relu", "sigmoid", "identity". Throws ConfigError otherwise.
Activation parse_activation(std::string_view name);

/// One fully connected layer: out = act(in · Wᵀ + b), W is out × in.
class DenseLayer {
 public:
  DenseLayer(Tensor2 weights, std::vector<double> biases, Activation activation);

  const Tensor2& weights() const noexcept { return weights_; }
  const std::vector<double>& biases() const noexcept { return biases_; }
  std::span<double> weight_values() noexcept { return weights_.values(); }
  std::span<double> bias_values() noexcept { return biases_; }
  Activation activation() const noexcept { return activation_; }

  std::size_t in_dim() const noexcept { return weights_.cols(); }
  std::size_t out_dim() const noexcept { return weights_.rows(); }
  std::size_t parameter_count() const noexcept { return weights_.size() + biases_.size(); }

  bool operator==(const DenseLayer&) const = default;

 private:
  Tensor2 weights_;
  std::vector<double> biases_;
  Activation activation_;
};

class DenseNetwork {
 public:
  DenseNetwork(std::size_t input_dim, std::vector<DenseLayer> layers);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept;
  std::size_t parameter_count() const noexcept;

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  DenseLayer& layer(std::size_t i) { return layers_.at(i); }
  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }

  bool operator==(const DenseNetwork&) const = default;

 private:
  std::size_t input_dim_;
  std::vector<DenseLayer> layers_;
};

/// ReLU on every hidden layer and a sigmoid on the last.
std::vector<Activation> classifier_activations(std::size_t layer_count);

/// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
DenseLayer init_layer(std::size_t in_dim, std::size_t out_dim, Activation activation,
                      RngStream& rng);

DenseNetwork init_network(std::span<const std::size_t> layer_sizes, std::size_t input_dim,
                          std::span<const Activation> activation_plan, RngStream& rng);

/// activations[0] is the input batch, activations[i + 1] the output of layer i.
struct ForwardTrace {
  std::vector<Tensor2> activations;

  const Tensor2& output() const { return activations.back(); }
};

Tensor2 forward_layer(const DenseLayer& layer, const Tensor2& input);
ForwardTrace forward(const DenseNetwork& net, const Tensor2& batch);

struct LayerGradients {
  Tensor2 weights;
  std::vector<double> biases;
};

struct LayerBackward {
  LayerGradients params;
  Tensor2 input;  // dL/d(layer input)
};

/// Backpropagates dL/d(output) through one layer given its forward input and output.
LayerBackward backward_layer(const DenseLayer& layer, const Tensor2& input,
                             const Tensor2& output, const Tensor2& output_grad);

struct NetworkGradients {
  std::vector<LayerGradients> layers;
  Tensor2 input;  // dL/d(batch), used when chaining networks
};

NetworkGradients backward(const DenseNetwork& net, const ForwardTrace& trace,
                          const Tensor2& loss_gradient);

/// Weight and bias spans of every layer in order [W0, b0, W1, b1, ...].
std::vector<std::span<double>> parameter_blocks(DenseNetwork& net);
std::vector<std::span<double>> parameter_blocks(DenseLayer& layer);
std::vector<std::span<const double>> gradient_blocks(const NetworkGradients& grads);
std::vector<std::span<const double>> gradient_blocks(const LayerGradients& grads);

}  // namespace tierflow
