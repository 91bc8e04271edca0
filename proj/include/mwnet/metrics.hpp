#pragma once

#include <span>
#include <vector>

#include "mwnet/biasgen.hpp"
#include "mwnet/nnet.hpp"
#include "mwnet/weightnet.hpp"

namespace mwnet {

using Confusion = std::vector<std::vector<std::size_t>>;

struct Evaluation {
  double accuracy = 0.0;
  Confusion confusion;  // confusion[true][predicted]
};

/// Argmax prediction per sample (ties go to the lower class index), scored
/// against the true labels.
Evaluation evaluate(const DenseNet& classifier, const BiasedDataset& test_set);

struct MonotonicityScore {
  double rho = 0.0;
  bool degenerate = false;  // constant weights; rho reported as 0
};

/// Spearman rank correlation between probed losses and weights, with
/// average ranks for ties. Needs at least 10 points.
MonotonicityScore monotonicity_score(std::span<const CurvePoint> curve);

/// Spearman correlation of two equally long samples (average ranks for ties).
/// A constant input gives rho 0 with the degenerate flag set.
MonotonicityScore spearman(std::span<const double> x, std::span<const double> y);

struct StabilityPoint {
  std::size_t epoch = 0;
  double mean_abs_delta = 0.0;
  double std_abs_delta = 0.0;
};

/// snapshots[e][k] is the weight of tracked sample k at snapshot e. Entry e of
/// the result aggregates |snapshots[e + 1][k] - snapshots[e][k]| over k and is
/// labeled epoch e + 1.
std::vector<StabilityPoint> stability_trace(const std::vector<std::vector<double>>& snapshots);

}  // namespace mwnet
