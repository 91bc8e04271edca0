#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mwnet/biasgen.hpp"
#include "mwnet/matrix.hpp"
#include "mwnet/nnet.hpp"
#include "mwnet/weightnet.hpp"

namespace mwnet {

struct TrainConfig {
  double alpha = 0.1;  // classifier step size
  double beta = 1e-3;  // weight-net step size
  std::size_t n = 100; // training mini-batch
  std::size_t m = 10;  // meta mini-batch
  std::size_t T = 1000;
  double tau = kDefaultTau;
  /// Batch-normalized weights eta_i in both classifier steps; when false the
  /// raw V_i / n coefficients are used.
  bool normalize = true;
  double classifier_momentum = 0.9;
  double classifier_weight_decay = 5e-4;
  /// Ignore momentum and weight decay in the actual classifier step.
  bool plain_classifier_step = false;
  /// (iteration, multiplier): from that iteration on alpha is scaled by the
  /// product of every multiplier whose iteration has been reached.
  std::vector<std::pair<std::size_t, double>> lr_schedule;
  /// beta_t = beta / sqrt(1 + t / beta_decay_iterations) when positive,
  /// constant beta otherwise.
  double beta_decay_iterations = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  double alpha_at(std::size_t iteration) const;
  double beta_at(std::size_t iteration) const;
};

struct TrainState {
  DenseNet w;
  MWNet theta;
  std::vector<double> velocity;
  std::size_t iteration = 0;

  TrainState(DenseNet classifier, MWNet weight_net);
  bool operator==(const TrainState&) const = default;
};

struct LabeledBatch {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::size_t> sample_ids;

  std::size_t size() const { return labels.size(); }
};

/// Rows of the dataset at the given positions, with observed labels.
LabeledBatch make_batch(const BiasedDataset& dataset, std::span<const std::size_t> indices);

/// Reorders a batch by sample id so reductions follow a canonical order.
LabeledBatch canonical_order(LabeledBatch batch);

/// Per-sample loss evaluation of a classifier on a batch, with gradients.
struct BatchGradients {
  std::vector<double> losses;
  Matrix grads;  // batch x param_count
};

BatchGradients batch_gradients(const DenseNet& net, const LabeledBatch& batch, const LossFn& loss);
std::vector<double> batch_losses(const DenseNet& net, const LabeledBatch& batch, const LossFn& loss);

/// Coefficient of each per-sample gradient in a classifier step: eta_i under
/// normalization, raw_i / n otherwise.
std::vector<double> step_coefficients(std::span<const double> raw, bool normalize, double tau);

double weighted_train_loss(const DenseNet& w, const MWNet& theta, const LabeledBatch& batch,
                           const TrainConfig& config, const LossFn& loss = softmax_cross_entropy);

struct VirtualStep {
  std::vector<double> w_hat;
  BatchGradients train;        // per-sample losses and gradients at w
  std::vector<double> raw_weights;
  std::vector<double> coefficients;
};

/// One plain SGD step on the weighted loss (no momentum, no decay).
VirtualStep virtual_update(const TrainState& state, const LabeledBatch& batch, double alpha,
                           const TrainConfig& config, const LossFn& loss = softmax_cross_entropy);

struct MetaGradientReport {
  std::vector<double> grad_theta;
  Matrix G;                           // m x n gradient similarities
  std::vector<double> mean_G_per_j;   // (1/m) sum_i G_ij
  std::vector<double> per_sample_weights;
  std::vector<double> train_losses;   // per-sample losses at w
  double meta_loss = 0.0;             // mean meta loss at w_hat
};

/// Analytic gradient of the mean meta loss at w_hat(theta) with respect to
/// theta, assembled from the gradient similarities G_ij.
MetaGradientReport meta_gradient_direct(const TrainState& state, const LabeledBatch& train_batch,
                                        const LabeledBatch& meta_batch, double alpha, const TrainConfig& config,
                                        const LossFn& loss = softmax_cross_entropy);

/// Same contraction as meta_gradient_direct, reusing an existing virtual step.
MetaGradientReport meta_gradient_from(const TrainState& state, const VirtualStep& step,
                                      const LabeledBatch& meta_batch, double alpha, const TrainConfig& config,
                                      const LossFn& loss = softmax_cross_entropy);

/// Central differences of theta -> mean meta loss at w_hat(theta).
std::vector<double> meta_gradient_fd(const TrainState& state, const LabeledBatch& train_batch,
                                     const LabeledBatch& meta_batch, double alpha, double eps,
                                     const TrainConfig& config, const LossFn& loss = softmax_cross_entropy);

void update_theta(TrainState& state, std::span<const double> grad_theta, double beta);

/// Actual classifier step with weights recomputed under the current theta.
/// `train` may carry the per-sample gradients from this iteration's virtual
/// step; they do not depend on theta.
void update_classifier(TrainState& state, const LabeledBatch& batch, double alpha, const TrainConfig& config,
                       const BatchGradients* train = nullptr, const LossFn& loss = softmax_cross_entropy);

/// Classifier step with externally supplied raw weights.
void update_classifier_with(TrainState& state, const BatchGradients& train, std::span<const double> raw,
                            double alpha, const TrainConfig& config);

MetaGradientReport train_step(TrainState& state, const LabeledBatch& train_batch, const LabeledBatch& meta_batch,
                              const TrainConfig& config, const LossFn& loss = softmax_cross_entropy);

/// Fixed loss-to-weight function used in place of the weight net.
using WeightFn = std::function<std::vector<double>(std::span<const double> losses)>;

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double meta_loss = 0.0;
  double test_accuracy = 0.0;
  double meta_grad_norm = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::vector<std::size_t> tracked;               // positions in the training set
  std::vector<std::vector<double>> tracked_weights;  // one snapshot per epoch boundary, first at start
  std::vector<std::string> warnings;
};

struct TrainResult {
  TrainState state;
  TrainLog log;
};

struct TrainOptions {
  std::size_t tracked_count = 10;
  /// When set, the weight net is bypassed and never updated.
  WeightFn fixed_weights;
  LossFn loss = softmax_cross_entropy;
};

/// Weights the current model assigns to the given samples: the fixed
/// function if one is supplied, the weight net otherwise.
std::vector<double> sample_weights(const TrainState& state, const BiasedDataset& data,
                                   std::span<const std::size_t> positions, const TrainOptions& options);

/// Iterations per epoch, ceil(N / n).
std::size_t iterations_per_epoch(std::size_t train_size, std::size_t n);

TrainResult train(const BiasedDataset& train_set, const BiasedDataset& meta_set, const BiasedDataset& test_set,
                  TrainState initial, const TrainConfig& config, const TrainOptions& options = {});

}  // namespace mwnet
