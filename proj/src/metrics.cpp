#include "mwnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mwnet/errors.hpp"

namespace mwnet {

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

Evaluation evaluate(const DenseNet& classifier, const BiasedDataset& test_set) {
  if (test_set.size() == 0) throw ConfigError("test set is empty");
  const auto out = forward(classifier, test_set.features).outputs;
  const std::size_t c = test_set.num_classes;
  if (out.cols() != c) throw ShapeError("classifier output width differs from class count");
  Evaluation ev;
  ev.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto z = out.row(i);
    const auto pred = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    const auto truth = static_cast<std::size_t>(test_set.true_labels[i]);
    ++ev.confusion[truth][pred];
    if (pred == truth) ++correct;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(out.rows());
  return ev;
}

MonotonicityScore spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {sxy / std::sqrt(sxx * syy), false};
}

MonotonicityScore monotonicity_score(std::span<const CurvePoint> curve) {
  if (curve.size() < 10) throw ConfigError("monotonicity score needs at least 10 curve points");
  std::vector<double> loss, weight;
  for (const auto& p : curve) {
    loss.push_back(p.loss);
    weight.push_back(p.weight);
  }
  return spearman(loss, weight);
}

std::vector<StabilityPoint> stability_trace(const std::vector<std::vector<double>>& snapshots) {
  if (snapshots.size() < 2) throw ConfigError("stability trace needs at least two snapshots");
  std::vector<StabilityPoint> trace;
  for (std::size_t e = 0; e + 1 < snapshots.size(); ++e) {
    const auto& a = snapshots[e];
    const auto& b = snapshots[e + 1];
    if (a.size() != b.size()) throw ShapeError("snapshots track different sample counts");
    StabilityPoint pt{e + 1, 0.0, 0.0};
    if (!a.empty()) {
      const double k = static_cast<double>(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) pt.mean_abs_delta += std::abs(b[i] - a[i]);
      pt.mean_abs_delta /= k;
      double var = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(b[i] - a[i]) - pt.mean_abs_delta;
        var += d * d;
      }
      pt.std_abs_delta = std::sqrt(var / k);
    }
    trace.push_back(pt);
  }
  return trace;
}

}  // namespace mwnet
