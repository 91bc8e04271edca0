#include "mwnet/weightnet.hpp"

#include <cmath>
#include <sstream>

#include "mwnet/errors.hpp"

namespace mwnet {

namespace {

Matrix loss_column(std::span<const double> losses) {
  if (!all_finite(losses)) throw NumericError("non-finite loss fed to the weight net");
  return Matrix(losses.size(), 1, std::vector<double>(losses.begin(), losses.end()));
}

}  // namespace

MWNet::MWNet(DenseNet net) : net_(std::move(net)) {
  if (net_.input_dim() != 1) throw ShapeError("weight net must take exactly one input");
  if (net_.output_dim() != 1) throw ShapeError("weight net must produce exactly one output");
  if (net_.layers().back().activation != Activation::Sigmoid)
    throw ShapeError("weight net must end in a sigmoid");
}

std::vector<LayerSpec> mwnet_specs(const std::vector<std::size_t>& hidden) {
  std::vector<LayerSpec> specs;
  std::size_t in = 1;
  for (std::size_t h : hidden) {
    specs.push_back({in, h, Activation::ReLU});
    in = h;
  }
  specs.push_back({in, 1, Activation::Sigmoid});
  return specs;
}

std::vector<std::size_t> parse_architecture(const std::string& arch) {
  std::vector<std::size_t> widths;
  std::stringstream ss(arch);
  std::string tok;
  while (std::getline(ss, tok, '-')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(tok, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad weight-net architecture '" + arch + "'");
    }
    if (pos != tok.size() || v == 0) throw ConfigError("bad weight-net architecture '" + arch + "'");
    widths.push_back(v);
  }
  if (widths.size() < 2 || widths.front() != 1 || widths.back() != 1)
    throw ConfigError("weight-net architecture must look like 1-...-1, got '" + arch + "'");
  return {widths.begin() + 1, widths.end() - 1};
}

std::string format_architecture(const std::vector<std::size_t>& hidden) {
  std::string s = "1";
  for (std::size_t h : hidden) s += "-" + std::to_string(h);
  return s + "-1";
}

MWNet init_mwnet(const std::vector<std::size_t>& hidden, std::uint64_t seed) {
  DenseNet net = init_net(mwnet_specs(hidden), seed);
  // Zero output layer: V = 0.5 for every loss until the first meta step.
  auto p = net.params();
  std::fill(p.begin() + static_cast<std::ptrdiff_t>(net.weight_offset(net.layers().size() - 1)), p.end(), 0.0);
  net.set_params(std::move(p));
  return MWNet(std::move(net));
}

std::vector<double> mw_forward(const MWNet& theta, std::span<const double> losses) {
  if (losses.empty()) return {};
  auto out = forward(theta.net(), loss_column(losses)).outputs;
  return std::move(out.data());
}

Matrix mw_jacobian(const MWNet& theta, std::span<const double> losses) {
  if (losses.empty()) return Matrix(0, theta.param_count());
  auto fr = forward(theta.net(), loss_column(losses));
  return per_sample_gradients(theta.net(), fr.cache, Matrix(losses.size(), 1, 1.0));
}

std::vector<double> normalize(std::span<const double> raw, double tau) {
  if (!(tau > 0.0)) throw ConfigError("normalization constant tau must be positive");
  double sum = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0 && v <= 1.0)) throw NumericError("raw weight outside [0, 1]");
    sum += v;
  }
  const double denom = sum == 0.0 ? tau : sum;
  std::vector<double> eta(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) eta[i] = raw[i] / denom;
  return eta;
}

WeightVector make_weights(std::vector<double> raw, double tau) {
  auto eta = normalize(raw, tau);
  return {std::move(raw), std::move(eta), tau};
}

std::vector<CurvePoint> probe_curve(const MWNet& theta, double loss_min, double loss_max, std::size_t steps) {
  if (!(loss_min < loss_max) || !std::isfinite(loss_min) || !std::isfinite(loss_max))
    throw ConfigError("probe range must satisfy min < max");
  if (steps < 2) throw ConfigError("probe needs at least two steps");
  std::vector<double> grid(steps);
  const double h = (loss_max - loss_min) / static_cast<double>(steps - 1);
  for (std::size_t k = 0; k < steps; ++k) grid[k] = loss_min + h * static_cast<double>(k);
  grid.back() = loss_max;
  auto w = mw_forward(theta, grid);
  std::vector<CurvePoint> curve(steps);
  for (std::size_t k = 0; k < steps; ++k) curve[k] = {grid[k], w[k]};
  return curve;
}

}  // namespace mwnet
