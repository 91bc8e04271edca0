#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "mwnet/matrix.hpp"
#include "mwnet/rng.hpp"

namespace mwnet {

/// Labeled samples with both the observed (possibly corrupted) label and the
/// true label. ids are stable across subsetting so downstream reports can
/// refer back to the generated pool.
struct BiasedDataset {
  Matrix features;
  std::vector<int> observed_labels;
  std::vector<int> true_labels;
  std::vector<bool> corrupted;
  std::vector<std::size_t> class_counts;
  std::size_t num_classes = 0;
  std::vector<std::size_t> ids;

  std::size_t size() const { return observed_labels.size(); }
  std::size_t dim() const { return features.cols(); }

  BiasedDataset subset(std::span<const std::size_t> indices) const;
  /// Recomputes corrupted flags and class counts from the labels.
  void refresh();
  /// Throws if the corrupted flags or class counts disagree with the labels.
  void check() const;

  bool operator==(const BiasedDataset&) const = default;
};

struct GaussianMixtureSpec {
  std::size_t num_classes = 3;
  std::size_t dim = 2;
  Matrix means;  // num_classes x dim
  double scale = 1.0;
  std::size_t per_class_count = 100;
};

/// Class means evenly spaced on a circle of the given radius in the first two
/// coordinates (on a line when dim == 1).
Matrix circle_means(std::size_t num_classes, std::size_t dim, double radius);

struct ImbalanceSpec {
  std::size_t base_count = 1;
  double factor = 1.0;
};

enum class NoiseKind { Uniform, Flip };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Uniform;
  double rate = 0.0;
  std::uint64_t seed = 0;
};

BiasedDataset gen_gaussians(const GaussianMixtureSpec& spec, std::uint64_t seed);

/// Per-class sizes round(base_count * mu^i) with mu = factor^(-1/(c-1)).
std::vector<std::size_t> longtail_counts(std::size_t num_classes, const ImbalanceSpec& spec);

BiasedDataset apply_longtail(const BiasedDataset& dataset, const ImbalanceSpec& spec, std::uint64_t seed);

/// With probability p each observed label is redrawn uniformly over all c
/// classes, so the expected corrupted fraction is p (c - 1) / c.
BiasedDataset apply_uniform_noise(const BiasedDataset& dataset, double p, std::uint64_t seed);

/// Two distinct "similar" targets per class, drawn once from the seed.
std::vector<std::pair<int, int>> flip_targets(std::size_t num_classes, std::uint64_t seed);

/// With probability p/2 each a label moves to one of its class's two targets.
BiasedDataset apply_flip_noise(const BiasedDataset& dataset, double p, std::uint64_t seed);

BiasedDataset apply_noise(const BiasedDataset& dataset, const NoiseSpec& spec);

struct MetaSplit {
  BiasedDataset meta;
  BiasedDataset remainder;
};

/// Draws exactly per_class clean samples of every class into the meta set.
MetaSplit split_meta(const BiasedDataset& dataset, std::size_t per_class, std::uint64_t seed);

/// Uniform draw of size distinct indices from [0, population).
std::vector<std::size_t> sample_batch(std::size_t population, std::size_t size, Rng& rng);

/// Header line "n,d,c", one record with those values, then a column header
/// (x0..x{d-1},observed,true,corrupted) and one row per sample.
void write_dataset_csv(std::ostream& out, const BiasedDataset& dataset);
BiasedDataset read_dataset_csv(std::istream& in);

}  // namespace mwnet
