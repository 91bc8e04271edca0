#include "mwnet/nnet.hpp"

#include <cmath>

#include "mwnet/errors.hpp"
#include "mwnet/rng.hpp"

namespace mwnet {

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::ReLU:
      return x > 0.0 ? x : 0.0;
    case Activation::Sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case Activation::Identity:
      return x;
  }
  return x;
}

// Derivative expressed through the pre-activation x and the output y.
// ReLU'(0) is taken as 0.
double activate_grad(Activation a, double x, double y) {
  switch (a) {
    case Activation::ReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid:
      return y * (1.0 - y);
    case Activation::Identity:
      return 1.0;
  }
  return 1.0;
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Identity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + name + "'");
}

std::size_t validate_specs(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw ShapeError("network needs at least one layer");
  std::size_t count = 0;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& s = specs[k];
    if (s.input_dim == 0 || s.output_dim == 0)
      throw ShapeError("layer " + std::to_string(k) + " has a zero dimension");
    if (k > 0 && specs[k - 1].output_dim != s.input_dim)
      throw ShapeError("layer " + std::to_string(k - 1) + " outputs " +
                       std::to_string(specs[k - 1].output_dim) + " but layer " + std::to_string(k) +
                       " expects " + std::to_string(s.input_dim));
    count += s.input_dim * s.output_dim + s.output_dim;
  }
  return count;
}

DenseNet::DenseNet(std::vector<LayerSpec> layers, std::vector<double> params)
    : layers_(std::move(layers)) {
  const std::size_t count = validate_specs(layers_);
  std::size_t off = 0;
  for (const auto& s : layers_) {
    offsets_.push_back(off);
    off += s.input_dim * s.output_dim + s.output_dim;
  }
  if (params.size() != count)
    throw ShapeError("expected " + std::to_string(count) + " parameters, got " +
                     std::to_string(params.size()));
  set_params(std::move(params));
}

void DenseNet::set_params(std::vector<double> params) {
  if (params.size() != params_.size() && !params_.empty())
    throw ShapeError("parameter vector length changed");
  if (!all_finite(params)) throw NumericError("non-finite network parameter");
  params_ = std::move(params);
}

DenseNet init_net(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  const std::size_t count = validate_specs(specs);
  std::vector<double> params(count, 0.0);
  Rng rng(seed);
  std::size_t off = 0;
  for (const auto& s : specs) {
    const double scale = std::sqrt((s.activation == Activation::ReLU ? 2.0 : 1.0) /
                                   static_cast<double>(s.input_dim));
    for (std::size_t k = 0; k < s.input_dim * s.output_dim; ++k) params[off + k] = scale * rng.normal();
    off += s.input_dim * s.output_dim + s.output_dim;
  }
  return DenseNet(specs, std::move(params));
}

ForwardResult forward(const DenseNet& net, const Matrix& batch) {
  if (batch.cols() != net.input_dim())
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                     std::to_string(net.input_dim()));
  if (!all_finite(batch.data())) throw NumericError("non-finite network input");

  const auto& p = net.params();
  ForwardCache cache;
  cache.batch_size = batch.rows();
  cache.activations.push_back(batch);
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const auto& s = net.layers()[k];
    const Matrix& in = cache.activations.back();
    Matrix pre(in.rows(), s.output_dim);
    Matrix out(in.rows(), s.output_dim);
    const double* w = p.data() + net.weight_offset(k);
    const double* b = p.data() + net.bias_offset(k);
    for (std::size_t r = 0; r < in.rows(); ++r) {
      auto x = in.row(r);
      for (std::size_t o = 0; o < s.output_dim; ++o) {
        double z = b[o];
        const double* wrow = w + o * s.input_dim;
        for (std::size_t i = 0; i < s.input_dim; ++i) z += wrow[i] * x[i];
        pre(r, o) = z;
        out(r, o) = activate(s.activation, z);
      }
    }
    cache.pre_activations.push_back(std::move(pre));
    cache.activations.push_back(std::move(out));
  }
  return {cache.activations.back(), std::move(cache)};
}

Matrix per_sample_gradients(const DenseNet& net, const ForwardCache& cache, const Matrix& upstream) {
  const std::size_t nlayers = net.layers().size();
  if (cache.activations.size() != nlayers + 1 || cache.pre_activations.size() != nlayers)
    throw ShapeError("forward cache does not match network depth");
  if (upstream.rows() != cache.batch_size || upstream.cols() != net.output_dim())
    throw ShapeError("upstream gradient shape does not match batch outputs");

  const auto& p = net.params();
  Matrix grads(cache.batch_size, net.param_count());
  std::vector<double> delta;
  std::vector<double> prev;
  for (std::size_t r = 0; r < cache.batch_size; ++r) {
    auto g = grads.row(r);
    auto up = upstream.row(r);
    delta.assign(up.begin(), up.end());
    for (std::size_t k = nlayers; k-- > 0;) {
      const auto& s = net.layers()[k];
      auto z = cache.pre_activations[k].row(r);
      auto y = cache.activations[k + 1].row(r);
      for (std::size_t o = 0; o < s.output_dim; ++o) delta[o] *= activate_grad(s.activation, z[o], y[o]);

      auto x = cache.activations[k].row(r);
      double* gw = g.data() + net.weight_offset(k);
      double* gb = g.data() + net.bias_offset(k);
      for (std::size_t o = 0; o < s.output_dim; ++o) {
        gb[o] = delta[o];
        for (std::size_t i = 0; i < s.input_dim; ++i) gw[o * s.input_dim + i] = delta[o] * x[i];
      }
      if (k == 0) break;
      const double* w = p.data() + net.weight_offset(k);
      prev.assign(s.input_dim, 0.0);
      for (std::size_t o = 0; o < s.output_dim; ++o)
        for (std::size_t i = 0; i < s.input_dim; ++i) prev[i] += w[o * s.input_dim + i] * delta[o];
      delta.swap(prev);
    }
  }
  return grads;
}

std::vector<double> weighted_row_sum(const Matrix& grads, std::span<const double> coeffs) {
  if (coeffs.size() != grads.rows()) throw ShapeError("one coefficient per gradient row required");
  std::vector<double> out(grads.cols(), 0.0);
  for (std::size_t r = 0; r < grads.rows(); ++r) {
    const double c = coeffs[r];
    auto g = grads.row(r);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c * g[k];
  }
  return out;
}

SampleLosses softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) throw ShapeError("one label per logit row required");
  SampleLosses ce{std::vector<double>(logits.rows()), Matrix(logits.rows(), logits.cols())};
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols()) throw ShapeError("label out of range");
    auto z = logits.row(r);
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    ce.losses[r] = lse - z[y];
    if (!std::isfinite(ce.losses[r])) throw NumericError("non-finite cross-entropy");
    for (std::size_t c = 0; c < z.size(); ++c) ce.grad(r, c) = std::exp(z[c] - lse);
    ce.grad(r, y) -= 1.0;
  }
  return ce;
}

std::vector<double> fd_gradient(const ScalarFn& loss, std::span<const double> params, double eps) {
  if (!(eps > 0.0)) throw ConfigError("finite-difference step must be positive");
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> g(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double orig = p[k];
    p[k] = orig + eps;
    const double fp = loss(p);
    p[k] = orig - eps;
    const double fm = loss(p);
    p[k] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) throw NumericError("non-finite loss in finite differences");
    g[k] = (fp - fm) / (2.0 * eps);
  }
  return g;
}

void sgd_step(std::span<double> params, std::span<const double> grad, const SgdSettings& settings,
              std::span<double> velocity) {
  if (grad.size() != params.size() || velocity.size() != params.size())
    throw ShapeError("sgd_step: params, grad and velocity must have equal length");
  if (!(settings.lr >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (!(settings.momentum >= 0.0 && settings.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(settings.weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
  for (std::size_t k = 0; k < params.size(); ++k) {
    velocity[k] = settings.momentum * velocity[k] + grad[k] + settings.weight_decay * params[k];
    params[k] -= settings.lr * velocity[k];
  }
}

}  // namespace mwnet
