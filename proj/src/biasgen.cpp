#include "mwnet/biasgen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "mwnet/csv.hpp"
#include "mwnet/errors.hpp"

namespace mwnet {

namespace {

void check_rate(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("noise rate must lie in [0, 1]");
}

// Partial Fisher-Yates: the first k entries of pool become a uniform draw
// without replacement.
void partial_shuffle(std::vector<std::size_t>& pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
}

std::vector<std::vector<std::size_t>> indices_by_class(const std::vector<int>& labels, std::size_t c) {
  std::vector<std::vector<std::size_t>> out(c);
  for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
  return out;
}

}  // namespace

BiasedDataset BiasedDataset::subset(std::span<const std::size_t> indices) const {
  BiasedDataset out;
  out.features = features.select_rows(indices);
  out.num_classes = num_classes;
  for (std::size_t i : indices) {
    out.observed_labels.push_back(observed_labels[i]);
    out.true_labels.push_back(true_labels[i]);
    out.ids.push_back(ids[i]);
  }
  out.refresh();
  return out;
}

void BiasedDataset::refresh() {
  corrupted.assign(size(), false);
  class_counts.assign(num_classes, 0);
  for (std::size_t i = 0; i < size(); ++i) {
    corrupted[i] = observed_labels[i] != true_labels[i];
    ++class_counts[static_cast<std::size_t>(observed_labels[i])];
  }
}

void BiasedDataset::check() const {
  if (features.rows() != size() || true_labels.size() != size() || corrupted.size() != size() ||
      ids.size() != size())
    throw ShapeError("dataset columns have inconsistent lengths");
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < size(); ++i) {
    const int y = observed_labels[i];
    const int t = true_labels[i];
    if (y < 0 || t < 0 || static_cast<std::size_t>(y) >= num_classes ||
        static_cast<std::size_t>(t) >= num_classes)
      throw ShapeError("label out of range");
    if (corrupted[i] != (y != t)) throw ShapeError("corrupted flag disagrees with labels");
    ++counts[static_cast<std::size_t>(y)];
  }
  if (counts != class_counts) throw ShapeError("class counts disagree with observed labels");
}

Matrix circle_means(std::size_t num_classes, std::size_t dim, double radius) {
  Matrix means(num_classes, dim);
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (dim == 1) {
      means(k, 0) = radius * (static_cast<double>(k) - 0.5 * static_cast<double>(num_classes - 1));
      continue;
    }
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_classes);
    means(k, 0) = radius * std::cos(angle);
    means(k, 1) = radius * std::sin(angle);
  }
  return means;
}

BiasedDataset gen_gaussians(const GaussianMixtureSpec& spec, std::uint64_t seed) {
  if (spec.num_classes < 2) throw ConfigError("mixture needs at least two classes");
  if (spec.dim < 1) throw ConfigError("mixture dimension must be at least one");
  if (spec.per_class_count < 1) throw ConfigError("per_class_count must be at least one");
  if (!(spec.scale >= 0.0)) throw ConfigError("covariance scale must be non-negative");
  if (spec.means.rows() != spec.num_classes || spec.means.cols() != spec.dim)
    throw ConfigError("means must be num_classes x dim");

  Rng rng = Rng(seed).split(streams::kFeatures);
  BiasedDataset ds;
  ds.num_classes = spec.num_classes;
  const std::size_t n = spec.num_classes * spec.per_class_count;
  ds.features = Matrix(n, spec.dim);
  std::size_t i = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t k = 0; k < spec.per_class_count; ++k, ++i) {
      for (std::size_t j = 0; j < spec.dim; ++j) ds.features(i, j) = spec.means(c, j) + spec.scale * rng.normal();
      ds.observed_labels.push_back(static_cast<int>(c));
      ds.true_labels.push_back(static_cast<int>(c));
      ds.ids.push_back(i);
    }
  }
  ds.refresh();
  return ds;
}

std::vector<std::size_t> longtail_counts(std::size_t num_classes, const ImbalanceSpec& spec) {
  if (spec.base_count < 1) throw ConfigError("imbalance base_count must be at least one");
  if (!(spec.factor >= 1.0)) throw ConfigError("imbalance factor must be at least one");
  if (num_classes < 2) throw ConfigError("imbalance needs at least two classes");
  const double mu = std::pow(spec.factor, -1.0 / static_cast<double>(num_classes - 1));
  std::vector<std::size_t> counts(num_classes);
  for (std::size_t i = 0; i < num_classes; ++i) {
    const double n = std::round(static_cast<double>(spec.base_count) * std::pow(mu, static_cast<double>(i)));
    if (n < 1.0) throw ConfigError("imbalance factor leaves class " + std::to_string(i) + " empty");
    counts[i] = static_cast<std::size_t>(n);
  }
  return counts;
}

BiasedDataset apply_longtail(const BiasedDataset& dataset, const ImbalanceSpec& spec, std::uint64_t seed) {
  const auto counts = longtail_counts(dataset.num_classes, spec);
  auto by_class = indices_by_class(dataset.true_labels, dataset.num_classes);
  Rng rng = Rng(seed).split(streams::kLongtail);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < dataset.num_classes; ++c) {
    auto& pool = by_class[c];
    if (pool.size() < spec.base_count)
      throw ConfigError("class " + std::to_string(c) + " has fewer samples than base_count");
    partial_shuffle(pool, counts[c], rng);
    keep.insert(keep.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(counts[c]));
  }
  std::sort(keep.begin(), keep.end());
  return dataset.subset(keep);
}

BiasedDataset apply_uniform_noise(const BiasedDataset& dataset, double p, std::uint64_t seed) {
  check_rate(p);
  BiasedDataset out = dataset;
  Rng rng = Rng(seed).split(streams::kNoise);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng.uniform() < p) out.observed_labels[i] = static_cast<int>(rng.below(out.num_classes));
  }
  out.refresh();
  return out;
}

std::vector<std::pair<int, int>> flip_targets(std::size_t num_classes, std::uint64_t seed) {
  if (num_classes < 3) throw ConfigError("flip noise needs at least 3 classes (two distinct targets per class)");
  Rng rng = Rng(seed).split(streams::kFlipTargets);
  std::vector<std::pair<int, int>> targets;
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < num_classes; ++k)
      if (k != c) others.push_back(k);
    partial_shuffle(others, 2, rng);
    targets.emplace_back(static_cast<int>(others[0]), static_cast<int>(others[1]));
  }
  return targets;
}

BiasedDataset apply_flip_noise(const BiasedDataset& dataset, double p, std::uint64_t seed) {
  check_rate(p);
  const auto targets = flip_targets(dataset.num_classes, seed);
  BiasedDataset out = dataset;
  Rng rng = Rng(seed).split(streams::kNoise);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double u = rng.uniform();
    if (u >= p) continue;
    const auto& t = targets[static_cast<std::size_t>(out.observed_labels[i])];
    out.observed_labels[i] = u < 0.5 * p ? t.first : t.second;
  }
  out.refresh();
  return out;
}

BiasedDataset apply_noise(const BiasedDataset& dataset, const NoiseSpec& spec) {
  return spec.kind == NoiseKind::Uniform ? apply_uniform_noise(dataset, spec.rate, spec.seed)
                                         : apply_flip_noise(dataset, spec.rate, spec.seed);
}

MetaSplit split_meta(const BiasedDataset& dataset, std::size_t per_class, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> clean(dataset.num_classes);
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (!dataset.corrupted[i]) clean[static_cast<std::size_t>(dataset.true_labels[i])].push_back(i);

  Rng rng = Rng(seed).split(streams::kMetaSplit);
  std::vector<std::size_t> meta_idx;
  for (std::size_t c = 0; c < dataset.num_classes; ++c) {
    if (clean[c].size() < per_class)
      throw ConfigError("class " + std::to_string(c) + " has only " + std::to_string(clean[c].size()) +
                        " clean samples, meta set needs " + std::to_string(per_class));
    partial_shuffle(clean[c], per_class, rng);
    meta_idx.insert(meta_idx.end(), clean[c].begin(), clean[c].begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  std::sort(meta_idx.begin(), meta_idx.end());
  std::vector<std::size_t> rest;
  std::size_t next = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (next < meta_idx.size() && meta_idx[next] == i) {
      ++next;
      continue;
    }
    rest.push_back(i);
  }
  return {dataset.subset(meta_idx), dataset.subset(rest)};
}

std::vector<std::size_t> sample_batch(std::size_t population, std::size_t size, Rng& rng) {
  if (size > population)
    throw ConfigError("batch size " + std::to_string(size) + " exceeds dataset size " + std::to_string(population));
  std::vector<std::size_t> pool(population);
  for (std::size_t i = 0; i < population; ++i) pool[i] = i;
  partial_shuffle(pool, size, rng);
  pool.resize(size);
  return pool;
}

void write_dataset_csv(std::ostream& out, const BiasedDataset& ds) {
  out << "n,d,c\n" << ds.size() << ',' << ds.dim() << ',' << ds.num_classes << '\n';
  for (std::size_t j = 0; j < ds.dim(); ++j) out << 'x' << j << ',';
  out << "observed,true,corrupted\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) out << csv::format(ds.features(i, j)) << ',';
    out << ds.observed_labels[i] << ',' << ds.true_labels[i] << ',' << (ds.corrupted[i] ? 1 : 0) << '\n';
  }
}

BiasedDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::split_line(line) != std::vector<std::string>{"n", "d", "c"})
    throw ConfigError("dataset file must start with the n,d,c header");
  if (!std::getline(in, line)) throw ConfigError("dataset file is missing its size record");
  auto dims = csv::split_line(line);
  if (dims.size() != 3) throw ConfigError("malformed dataset size record");
  const auto n = static_cast<std::size_t>(csv::parse_int(dims[0]));
  const auto d = static_cast<std::size_t>(csv::parse_int(dims[1]));
  const auto c = static_cast<std::size_t>(csv::parse_int(dims[2]));
  auto table = csv::read(in);
  if (table.header.size() != d + 3) throw ConfigError("dataset column header does not match d");
  if (table.rows.size() != n) throw ConfigError("dataset row count does not match n");

  BiasedDataset ds;
  ds.num_classes = c;
  ds.features = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = csv::parse_double(row[j]);
    ds.observed_labels.push_back(static_cast<int>(csv::parse_int(row[d])));
    ds.true_labels.push_back(static_cast<int>(csv::parse_int(row[d + 1])));
    ds.corrupted.push_back(csv::parse_int(row[d + 2]) != 0);
    ds.ids.push_back(i);
  }
  ds.class_counts.assign(c, 0);
  for (int y : ds.observed_labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= c) throw ConfigError("label out of range in dataset file");
    ++ds.class_counts[static_cast<std::size_t>(y)];
  }
  ds.check();
  return ds;
}

}  // namespace mwnet
