#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mwnet/matrix.hpp"

namespace mwnet {

enum class Activation { ReLU, Sigmoid, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct LayerSpec {
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  Activation activation = Activation::Identity;

  bool operator==(const LayerSpec&) const = default;
};

/// Fully connected feed-forward network with a flat parameter vector.
///
/// Parameter layout, layer by layer: the weight matrix (output_dim rows by
/// input_dim columns, row-major) followed by the bias vector. Every gradient
/// vector in the library uses this same layout.
class DenseNet {
 public:
  DenseNet(std::vector<LayerSpec> layers, std::vector<double> params);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<double>& params() const { return params_; }
  void set_params(std::vector<double> params);
  std::size_t param_count() const { return params_.size(); }
  std::size_t input_dim() const { return layers_.front().input_dim; }
  std::size_t output_dim() const { return layers_.back().output_dim; }

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + layers_[layer].input_dim * layers_[layer].output_dim;
  }

  bool operator==(const DenseNet& other) const {
    return layers_ == other.layers_ && params_ == other.params_;
  }

 private:
  std::vector<LayerSpec> layers_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

/// Validates that specs are non-empty, positive and chain correctly; returns
/// the total parameter count. Throws ShapeError otherwise.
std::size_t validate_specs(const std::vector<LayerSpec>& specs);

/// Gaussian init: std sqrt(2/input_dim) for ReLU layers, sqrt(1/input_dim)
/// otherwise. Biases start at zero.
DenseNet init_net(const std::vector<LayerSpec>& specs, std::uint64_t seed);

struct ForwardCache {
  std::size_t batch_size = 0;
  /// activations[0] is the input batch, activations[k + 1] the output of layer k.
  std::vector<Matrix> activations;
  std::vector<Matrix> pre_activations;
};

struct ForwardResult {
  Matrix outputs;
  ForwardCache cache;
};

ForwardResult forward(const DenseNet& net, const Matrix& batch);

/// Row i is the gradient of sample i's scalar loss with respect to every
/// parameter, given upstream(i, :) = dLoss_i / dOutput_i.
Matrix per_sample_gradients(const DenseNet& net, const ForwardCache& cache, const Matrix& upstream);

/// Sum over rows of coeffs[i] * grads.row(i), accumulated in row order.
std::vector<double> weighted_row_sum(const Matrix& grads, std::span<const double> coeffs);

/// Per-sample losses and their gradients with respect to the network
/// outputs (row i belongs to sample i).
struct SampleLosses {
  std::vector<double> losses;
  Matrix grad;
};

using LossFn = std::function<SampleLosses(const Matrix& outputs, std::span<const int> labels)>;

/// Softmax cross-entropy of each row of logits against an integer label.
SampleLosses softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central differences (f(p + eps e_k) - f(p - eps e_k)) / (2 eps).
std::vector<double> fd_gradient(const ScalarFn& loss, std::span<const double> params, double eps);

struct SgdSettings {
  double lr = 0.1;
  double momentum = 0.0;
  double weight_decay = 0.0;
};

/// velocity = momentum * velocity + grad + weight_decay * params;
/// params -= lr * velocity.
void sgd_step(std::span<double> params, std::span<const double> grad, const SgdSettings& settings,
              std::span<double> velocity);

}  // namespace mwnet
