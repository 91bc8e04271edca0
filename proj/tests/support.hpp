#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mwnet/biasgen.hpp"
#include "mwnet/matrix.hpp"
#include "mwnet/metaopt.hpp"
#include "mwnet/nnet.hpp"
#include "mwnet/rng.hpp"
#include "mwnet/weightnet.hpp"

namespace testing {

using namespace mwnet;

inline double rel_err(const std::vector<double>& a, const std::vector<double>& f) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - f[i]) * (a[i] - f[i]);
  return std::sqrt(d) / std::max(1.0, norm2(f));
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = scale * rng.normal();
  return m;
}

inline std::vector<int> random_labels(std::size_t n, std::size_t c, Rng& rng) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(c));
  return y;
}

/// Classifier d -> hidden... -> c with ReLU hidden layers.
inline DenseNet classifier(std::size_t d, const std::vector<std::size_t>& hidden, std::size_t c, std::uint64_t seed) {
  std::vector<LayerSpec> specs;
  std::size_t in = d;
  for (auto h : hidden) {
    specs.push_back({in, h, Activation::ReLU});
    in = h;
  }
  specs.push_back({in, c, Activation::Identity});
  return init_net(specs, seed);
}

/// Weight net with every parameter random (biases included), so no layer is
/// trivially zero.
inline MWNet random_mwnet(const std::vector<std::size_t>& hidden, std::uint64_t seed, double bias_scale = 0.5) {
  DenseNet net = init_net(mwnet_specs(hidden), seed);
  auto p = net.params();
  Rng r(seed, 99);
  for (std::size_t l = 0; l < net.layers().size(); ++l)
    for (std::size_t k = net.bias_offset(l); k < net.bias_offset(l) + net.layers()[l].output_dim; ++k)
      p[k] = bias_scale * r.normal();
  net.set_params(std::move(p));
  return MWNet(std::move(net));
}

/// Random labeled dataset with clean labels.
inline BiasedDataset random_dataset(std::size_t n, std::size_t d, std::size_t c, std::uint64_t seed) {
  Rng r(seed, 77);
  BiasedDataset ds;
  ds.features = random_matrix(n, d, r);
  ds.observed_labels = random_labels(n, c, r);
  ds.true_labels = ds.observed_labels;
  ds.num_classes = c;
  ds.ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.ids[i] = i;
  ds.refresh();
  return ds;
}

inline LabeledBatch first_rows(const BiasedDataset& ds, std::size_t begin, std::size_t count) {
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = begin + i;
  return make_batch(ds, idx);
}

inline double act(Activation a, double z) {
  switch (a) {
    case Activation::ReLU: return z > 0 ? z : 0.0;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Identity: return z;
  }
  return z;
}

inline double act_grad(Activation a, double z) {
  switch (a) {
    case Activation::ReLU: return z > 0 ? 1.0 : 0.0;
    case Activation::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

/// Straight-line scalar evaluation of one input vector.
inline std::vector<double> scalar_forward(const DenseNet& net, std::vector<double> x) {
  const auto& p = net.params();
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& s = net.layers()[l];
    std::vector<double> y(s.output_dim);
    for (std::size_t o = 0; o < s.output_dim; ++o) {
      double z = p[net.bias_offset(l) + o];
      for (std::size_t i = 0; i < s.input_dim; ++i) z += p[net.weight_offset(l) + o * s.input_dim + i] * x[i];
      y[o] = act(s.activation, z);
    }
    x = std::move(y);
  }
  return x;
}

/// Gradient of (1/B) sum_b <upstream_b, f(x_b)> by a batched backward pass,
/// written independently of the library.
inline std::vector<double> mean_gradient_oracle(const DenseNet& net, const Matrix& x, const Matrix& upstream) {
  const auto& p = net.params();
  const std::size_t B = x.rows(), L = net.layers().size();
  std::vector<double> g(net.param_count(), 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<std::vector<double>> acts{std::vector<double>(x.row(b).begin(), x.row(b).end())}, pres;
    for (std::size_t l = 0; l < L; ++l) {
      const auto& s = net.layers()[l];
      std::vector<double> z(s.output_dim), a(s.output_dim);
      for (std::size_t o = 0; o < s.output_dim; ++o) {
        z[o] = p[net.bias_offset(l) + o];
        for (std::size_t i = 0; i < s.input_dim; ++i)
          z[o] += p[net.weight_offset(l) + o * s.input_dim + i] * acts[l][i];
        a[o] = act(s.activation, z[o]);
      }
      pres.push_back(z);
      acts.push_back(a);
    }
    std::vector<double> delta(upstream.row(b).begin(), upstream.row(b).end());
    for (std::size_t l = L; l-- > 0;) {
      const auto& s = net.layers()[l];
      for (std::size_t o = 0; o < s.output_dim; ++o) delta[o] *= act_grad(s.activation, pres[l][o]);
      std::vector<double> prev(s.input_dim, 0.0);
      for (std::size_t o = 0; o < s.output_dim; ++o) {
        g[net.bias_offset(l) + o] += delta[o] / static_cast<double>(B);
        for (std::size_t i = 0; i < s.input_dim; ++i) {
          g[net.weight_offset(l) + o * s.input_dim + i] += delta[o] * acts[l][i] / static_cast<double>(B);
          prev[i] += p[net.weight_offset(l) + o * s.input_dim + i] * delta[o];
        }
      }
      delta = std::move(prev);
    }
  }
  return g;
}

/// Per-test scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("mwnet_test_" + name);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace testing
