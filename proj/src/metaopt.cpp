#include "mwnet/metaopt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mwnet/errors.hpp"
#include "mwnet/metrics.hpp"
#include "mwnet/rng.hpp"

namespace mwnet {

void TrainConfig::validate() const {
  // Zero step sizes are allowed: they freeze the corresponding parameters.
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a non-negative number");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a non-negative number");
  if (n < 1) throw ConfigError("training batch size n must be at least 1");
  if (m < 1) throw ConfigError("meta batch size m must be at least 1");
  if (T < 1) throw ConfigError("iteration budget T must be at least 1");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(classifier_momentum >= 0.0 && classifier_momentum < 1.0))
    throw ConfigError("classifier_momentum must lie in [0, 1)");
  if (!(classifier_weight_decay >= 0.0)) throw ConfigError("classifier_weight_decay must be non-negative");
  if (!(beta_decay_iterations >= 0.0)) throw ConfigError("beta_decay_iterations must be non-negative");
  for (const auto& [it, mult] : lr_schedule)
    if (!(mult >= 0.0) || !std::isfinite(mult)) throw ConfigError("lr_schedule multipliers must be non-negative");
}

double TrainConfig::alpha_at(std::size_t iteration) const {
  double a = alpha;
  for (const auto& [it, mult] : lr_schedule)
    if (it <= iteration) a *= mult;
  return a;
}

double TrainConfig::beta_at(std::size_t iteration) const {
  if (beta_decay_iterations <= 0.0) return beta;
  return beta / std::sqrt(1.0 + static_cast<double>(iteration) / beta_decay_iterations);
}

TrainState::TrainState(DenseNet classifier, MWNet weight_net)
    : w(std::move(classifier)), theta(std::move(weight_net)), velocity(w.param_count(), 0.0) {}

LabeledBatch make_batch(const BiasedDataset& dataset, std::span<const std::size_t> indices) {
  LabeledBatch b;
  b.features = dataset.features.select_rows(indices);
  for (std::size_t i : indices) {
    b.labels.push_back(dataset.observed_labels[i]);
    b.sample_ids.push_back(dataset.ids[i]);
  }
  return b;
}

LabeledBatch canonical_order(LabeledBatch batch) {
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return batch.sample_ids[a] < batch.sample_ids[b]; });
  LabeledBatch out;
  out.features = batch.features.select_rows(order);
  for (std::size_t k : order) {
    out.labels.push_back(batch.labels[k]);
    out.sample_ids.push_back(batch.sample_ids[k]);
  }
  return out;
}

BatchGradients batch_gradients(const DenseNet& net, const LabeledBatch& batch, const LossFn& loss) {
  auto fr = forward(net, batch.features);
  auto sl = loss(fr.outputs, batch.labels);
  return {std::move(sl.losses), per_sample_gradients(net, fr.cache, sl.grad)};
}

std::vector<double> batch_losses(const DenseNet& net, const LabeledBatch& batch, const LossFn& loss) {
  return loss(forward(net, batch.features).outputs, batch.labels).losses;
}

std::vector<double> step_coefficients(std::span<const double> raw, bool normalize_weights, double tau) {
  if (normalize_weights) return normalize(raw, tau);
  std::vector<double> c(raw.begin(), raw.end());
  const double n = static_cast<double>(raw.size());
  for (double& v : c) v /= n;
  return c;
}

double weighted_train_loss(const DenseNet& w, const MWNet& theta, const LabeledBatch& batch,
                           const TrainConfig& config, const LossFn& loss) {
  if (batch.size() == 0) throw ConfigError("weighted loss needs a non-empty batch");
  const auto losses = batch_losses(w, batch, loss);
  const auto coeff = step_coefficients(mw_forward(theta, losses), config.normalize, config.tau);
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) total += coeff[i] * losses[i];
  if (!std::isfinite(total)) throw NumericError("non-finite weighted training loss");
  return total;
}

VirtualStep virtual_update(const TrainState& state, const LabeledBatch& batch, double alpha,
                           const TrainConfig& config, const LossFn& loss) {
  VirtualStep vs;
  vs.train = batch_gradients(state.w, batch, loss);
  vs.raw_weights = mw_forward(state.theta, vs.train.losses);
  vs.coefficients = step_coefficients(vs.raw_weights, config.normalize, config.tau);
  const auto step = weighted_row_sum(vs.train.grads, vs.coefficients);
  vs.w_hat = state.w.params();
  for (std::size_t k = 0; k < step.size(); ++k) vs.w_hat[k] -= alpha * step[k];
  return vs;
}

MetaGradientReport meta_gradient_from(const TrainState& state, const VirtualStep& step,
                                      const LabeledBatch& meta_batch, double alpha, const TrainConfig& config,
                                      const LossFn& loss) {
  const std::size_t n = step.train.losses.size();
  const std::size_t m = meta_batch.size();
  if (n == 0 || m == 0) throw ConfigError("meta-gradient needs non-empty train and meta batches");

  const DenseNet net_hat(state.w.layers(), step.w_hat);
  const auto meta = batch_gradients(net_hat, meta_batch, loss);

  MetaGradientReport rep;
  rep.G = Matrix(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) rep.G(i, j) = dot(meta.grads.row(i), step.train.grads.row(j));

  rep.mean_G_per_j.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) rep.mean_G_per_j[j] += rep.G(i, j);
  for (double& g : rep.mean_G_per_j) g /= static_cast<double>(m);

  // d(meta loss)/d(coefficient_j) = -alpha * (1/m) sum_i G_ij.
  std::vector<double> dcoeff(n);
  for (std::size_t j = 0; j < n; ++j) dcoeff[j] = -alpha * rep.mean_G_per_j[j];

  // Chain through the coefficient map into d(meta loss)/dV_j.
  std::vector<double> dv(n);
  const auto& raw = step.raw_weights;
  if (!config.normalize) {
    for (std::size_t j = 0; j < n; ++j) dv[j] = dcoeff[j] / static_cast<double>(n);
  } else {
    double sum = 0.0;
    for (double v : raw) sum += v;
    if (sum == 0.0) {
      for (std::size_t j = 0; j < n; ++j) dv[j] = dcoeff[j] / config.tau;
    } else {
      // d eta_j / d V_k = [j == k] / S - V_j / S^2
      double cross = 0.0;
      for (std::size_t j = 0; j < n; ++j) cross += dcoeff[j] * raw[j];
      for (std::size_t k = 0; k < n; ++k) dv[k] = dcoeff[k] / sum - cross / (sum * sum);
    }
  }

  const auto jac = mw_jacobian(state.theta, step.train.losses);
  rep.grad_theta = weighted_row_sum(jac, dv);
  if (!all_finite(rep.grad_theta)) throw NumericError("non-finite meta-gradient");
  rep.per_sample_weights = raw;
  rep.train_losses = step.train.losses;
  double ml = 0.0;
  for (double l : meta.losses) ml += l;
  rep.meta_loss = ml / static_cast<double>(m);
  return rep;
}

MetaGradientReport meta_gradient_direct(const TrainState& state, const LabeledBatch& train_batch,
                                        const LabeledBatch& meta_batch, double alpha, const TrainConfig& config,
                                        const LossFn& loss) {
  if (train_batch.size() != config.n)
    throw ConfigError("training batch has " + std::to_string(train_batch.size()) + " samples, config.n is " +
                      std::to_string(config.n));
  if (meta_batch.size() != config.m)
    throw ConfigError("meta batch has " + std::to_string(meta_batch.size()) + " samples, config.m is " +
                      std::to_string(config.m));
  const auto vs = virtual_update(state, train_batch, alpha, config, loss);
  return meta_gradient_from(state, vs, meta_batch, alpha, config, loss);
}

std::vector<double> meta_gradient_fd(const TrainState& state, const LabeledBatch& train_batch,
                                     const LabeledBatch& meta_batch, double alpha, double eps,
                                     const TrainConfig& config, const LossFn& loss) {
  // Training losses and gradients at w do not depend on theta.
  const auto train = batch_gradients(state.w, train_batch, loss);
  auto meta_loss_at = [&](std::span<const double> theta_params) {
    MWNet theta = state.theta;
    theta.set_params(std::vector<double>(theta_params.begin(), theta_params.end()));
    const auto coeff = step_coefficients(mw_forward(theta, train.losses), config.normalize, config.tau);
    const auto step = weighted_row_sum(train.grads, coeff);
    auto w_hat = state.w.params();
    for (std::size_t k = 0; k < step.size(); ++k) w_hat[k] -= alpha * step[k];
    const auto losses = batch_losses(DenseNet(state.w.layers(), std::move(w_hat)), meta_batch, loss);
    double s = 0.0;
    for (double l : losses) s += l;
    return s / static_cast<double>(losses.size());
  };
  return fd_gradient(meta_loss_at, state.theta.params(), eps);
}

void update_theta(TrainState& state, std::span<const double> grad_theta, double beta) {
  if (grad_theta.size() != state.theta.param_count()) throw ShapeError("grad_theta length differs from theta");
  auto p = state.theta.params();
  for (std::size_t k = 0; k < p.size(); ++k) p[k] -= beta * grad_theta[k];
  state.theta.set_params(std::move(p));
}

void update_classifier_with(TrainState& state, const BatchGradients& train, std::span<const double> raw,
                            double alpha, const TrainConfig& config) {
  const auto coeff = step_coefficients(raw, config.normalize, config.tau);
  const auto grad = weighted_row_sum(train.grads, coeff);
  SgdSettings sgd{alpha, config.classifier_momentum, config.classifier_weight_decay};
  if (config.plain_classifier_step) sgd.momentum = sgd.weight_decay = 0.0;
  auto p = state.w.params();
  sgd_step(p, grad, sgd, state.velocity);
  state.w.set_params(std::move(p));
}

void update_classifier(TrainState& state, const LabeledBatch& batch, double alpha, const TrainConfig& config,
                       const BatchGradients* train, const LossFn& loss) {
  BatchGradients fresh;
  if (train == nullptr) {
    fresh = batch_gradients(state.w, batch, loss);
    train = &fresh;
  }
  update_classifier_with(state, *train, mw_forward(state.theta, train->losses), alpha, config);
}

MetaGradientReport train_step(TrainState& state, const LabeledBatch& train_batch, const LabeledBatch& meta_batch,
                              const TrainConfig& config, const LossFn& loss) {
  if (train_batch.size() != config.n || meta_batch.size() != config.m)
    throw ConfigError("batch sizes must match config n and m");
  const auto tb = canonical_order(train_batch);
  const auto mb = canonical_order(meta_batch);
  const double alpha = config.alpha_at(state.iteration);
  const double beta = config.beta_at(state.iteration);

  const auto vs = virtual_update(state, tb, alpha, config, loss);
  auto rep = meta_gradient_from(state, vs, mb, alpha, config, loss);
  update_theta(state, rep.grad_theta, beta);
  update_classifier(state, tb, alpha, config, &vs.train, loss);
  ++state.iteration;
  return rep;
}

std::size_t iterations_per_epoch(std::size_t train_size, std::size_t n) {
  if (n == 0) throw ConfigError("batch size must be positive");
  return (train_size + n - 1) / n;
}

std::vector<double> sample_weights(const TrainState& state, const BiasedDataset& data,
                                   std::span<const std::size_t> positions, const TrainOptions& options) {
  if (positions.empty()) return {};
  const auto losses = batch_losses(state.w, make_batch(data, positions), options.loss);
  return options.fixed_weights ? options.fixed_weights(losses) : mw_forward(state.theta, losses);
}

namespace {

std::vector<std::size_t> choose_tracked(const BiasedDataset& train_set, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> noisy, clean;
  for (std::size_t i = 0; i < train_set.size(); ++i) (train_set.corrupted[i] ? noisy : clean).push_back(i);
  Rng rng = Rng(seed).split(streams::kTracking);
  std::vector<std::size_t> out;
  auto take = [&](std::vector<std::size_t>& pool) {
    const std::size_t k = std::min(count - out.size(), pool.size());
    auto picked = sample_batch(pool.size(), k, rng);
    for (std::size_t p : picked) out.push_back(pool[p]);
  };
  // Noisy samples first; clean ones only fill up when noise is scarce.
  take(noisy);
  if (out.size() < count) take(clean);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TrainResult train(const BiasedDataset& train_set, const BiasedDataset& meta_set, const BiasedDataset& test_set,
                  TrainState initial, const TrainConfig& config, const TrainOptions& options) {
  config.validate();
  if (meta_set.size() == 0) throw ConfigError("meta set is empty");
  if (train_set.size() < config.n) throw ConfigError("training set is smaller than batch size n");
  if (meta_set.size() < config.m) throw ConfigError("meta set is smaller than meta batch size m");

  TrainResult res{std::move(initial), {}};
  auto& state = res.state;
  auto& log = res.log;
  if (meta_set.size() > train_set.size()) log.warnings.push_back("meta set is larger than the training set");

  Rng train_rng = Rng(config.seed).split(streams::kTrainBatches);
  Rng meta_rng = Rng(config.seed).split(streams::kMetaBatches);
  log.tracked = choose_tracked(train_set, options.tracked_count, config.seed);
  log.tracked_weights.push_back(sample_weights(state, train_set, log.tracked, options));

  const std::size_t per_epoch = iterations_per_epoch(train_set.size(), config.n);
  EpochRecord acc;
  std::size_t in_epoch = 0;
  for (std::size_t t = 0; t < config.T; ++t) {
    const auto tb = canonical_order(make_batch(train_set, sample_batch(train_set.size(), config.n, train_rng)));
    const auto mb = canonical_order(make_batch(meta_set, sample_batch(meta_set.size(), config.m, meta_rng)));

    double train_loss = 0.0;
    if (options.fixed_weights) {
      const double alpha = config.alpha_at(state.iteration);
      const auto grads = batch_gradients(state.w, tb, options.loss);
      update_classifier_with(state, grads, options.fixed_weights(grads.losses), alpha, config);
      for (double l : grads.losses) train_loss += l;
      const auto ml = batch_losses(state.w, mb, options.loss);
      acc.meta_loss += std::accumulate(ml.begin(), ml.end(), 0.0) / static_cast<double>(ml.size());
      ++state.iteration;
    } else {
      const auto rep = train_step(state, tb, mb, config, options.loss);
      for (double l : rep.train_losses) train_loss += l;
      acc.meta_loss += rep.meta_loss;
      acc.meta_grad_norm += norm2(rep.grad_theta);
    }
    acc.train_loss += train_loss / static_cast<double>(config.n);
    ++in_epoch;

    if (in_epoch == per_epoch || t + 1 == config.T) {
      EpochRecord rec;
      rec.epoch = log.epochs.size() + 1;
      const double k = static_cast<double>(in_epoch);
      rec.train_loss = acc.train_loss / k;
      rec.meta_loss = acc.meta_loss / k;
      rec.meta_grad_norm = acc.meta_grad_norm / k;
      rec.test_accuracy = evaluate(state.w, test_set).accuracy;
      log.epochs.push_back(rec);
      log.tracked_weights.push_back(sample_weights(state, train_set, log.tracked, options));
      acc = EpochRecord{};
      in_epoch = 0;
    }
  }
  return res;
}

}  // namespace mwnet
