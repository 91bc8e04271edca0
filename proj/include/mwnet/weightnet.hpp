#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mwnet/matrix.hpp"
#include "mwnet/nnet.hpp"

namespace mwnet {

/// Loss-to-weight network: one scalar input, ReLU hidden layers, one
/// sigmoid output in [0, 1].
class MWNet {
 public:
  explicit MWNet(DenseNet net);

  const DenseNet& net() const { return net_; }
  const std::vector<double>& params() const { return net_.params(); }
  void set_params(std::vector<double> params) { net_.set_params(std::move(params)); }
  std::size_t param_count() const { return net_.param_count(); }

  bool operator==(const MWNet&) const = default;

 private:
  DenseNet net_;
};

inline constexpr double kDefaultTau = 1e-8;

/// Layer specs for 1 -> hidden... -> 1.
std::vector<LayerSpec> mwnet_specs(const std::vector<std::size_t>& hidden);

/// Parses "1-100-1" style architecture strings into hidden widths.
std::vector<std::size_t> parse_architecture(const std::string& arch);
std::string format_architecture(const std::vector<std::size_t>& hidden);

/// init_net initialization with the output layer zeroed, so V = 0.5 everywhere.
MWNet init_mwnet(const std::vector<std::size_t>& hidden, std::uint64_t seed);

/// V(loss_i; theta) for each loss.
std::vector<double> mw_forward(const MWNet& theta, std::span<const double> losses);

/// Row j holds dV(loss_j; theta) / dtheta.
Matrix mw_jacobian(const MWNet& theta, std::span<const double> losses);

/// eta_i = raw_i / (sum + delta(sum)), delta(0) = tau and 0 elsewhere.
std::vector<double> normalize(std::span<const double> raw, double tau);

struct WeightVector {
  std::vector<double> raw;
  std::vector<double> normalized;
  double tau = kDefaultTau;
};

WeightVector make_weights(std::vector<double> raw, double tau);

struct CurvePoint {
  double loss;
  double weight;
};

/// Evenly spaced probe of the weighting function on [loss_min, loss_max];
/// the endpoints are included exactly.
std::vector<CurvePoint> probe_curve(const MWNet& theta, double loss_min, double loss_max, std::size_t steps);

}  // namespace mwnet
