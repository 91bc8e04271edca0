#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwnet/biasgen.hpp"
#include "mwnet/metaopt.hpp"

namespace mwnet {

struct GaussianBlock {
  std::size_t classes = 3;
  std::size_t dim = 2;
  double radius = 2.0;
  std::optional<Matrix> means;  // overrides the circle layout
  double scale = 1.0;
  std::size_t per_class_count = 100;
  std::size_t test_per_class = 100;
};

struct DatasetBlock {
  std::optional<GaussianBlock> gaussian;
  std::string train_file;
  std::string test_file;
};

struct BiasBlock {
  std::optional<double> imbalance_factor;
  std::optional<std::size_t> base_count;  // defaults to the per-class pool size
  std::optional<NoiseKind> noise_kind;
  double noise_rate = 0.0;
};

struct GradcheckBlock {
  std::size_t instances = 20;
  double eps = 1e-5;
  double tolerance = 1e-4;
};

/// Whole-experiment description loaded from a single JSON document.
struct ExperimentConfig {
  DatasetBlock dataset;
  BiasBlock bias;
  std::size_t meta_per_class = 10;
  std::vector<std::size_t> classifier_hidden{32};
  std::vector<std::size_t> weight_net_hidden{100};
  TrainConfig optim;
  /// When set, T is derived as epochs * ceil(N / n) once the training set exists.
  std::optional<std::size_t> epochs;
  /// (epoch, multiplier) pairs converted to iterations like `epochs`.
  std::vector<std::pair<std::size_t, double>> lr_schedule_epochs;
  std::size_t tracked_count = 10;
  std::size_t probe_points = 200;
  std::string output_dir;
  std::vector<std::uint64_t> seeds{1};
  GradcheckBlock gradcheck;
  nlohmann::json source;  // the document as given

  nlohmann::json to_json() const;
};

/// Strict parse: unknown keys, wrong types and missing required blocks raise
/// ConfigError naming the offending field.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

}  // namespace mwnet
