#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwnet/biasgen.hpp"
#include "mwnet/config.hpp"
#include "mwnet/metaopt.hpp"
#include "mwnet/metrics.hpp"
#include "mwnet/weightnet.hpp"

namespace mwnet {

struct WeightSample {
  std::size_t sample_id = 0;
  double weight = 0.0;
  bool corrupted = false;

  bool operator==(const WeightSample&) const = default;
};

struct RunReport {
  std::vector<EpochRecord> metrics;
  Confusion final_confusion;
  std::vector<CurvePoint> weight_curve;
  std::vector<WeightSample> weight_dist;
  std::vector<StabilityPoint> stability;
  nlohmann::json config_echo;

  std::vector<double> accuracy_history() const;
  std::vector<double> grad_norm_history() const;
  double final_accuracy() const;
  MonotonicityScore monotonicity() const;
  /// Mean weight of clean and of corrupted samples (NaN when a group is empty).
  std::pair<double, double> clean_noisy_means() const;

  bool operator==(const RunReport& other) const;
};

enum class BaselineKind { Uniform, IncreasingRamp, DecreasingStep };

struct BaselineSpec {
  BaselineKind kind = BaselineKind::Uniform;
  double gamma = 1.0;   // ramp exponent
  double lambda = 1.0;  // step threshold

  void validate() const;
};

std::string to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(const std::string& s);

/// The fixed loss-to-weight map a baseline trains with.
WeightFn baseline_weights(const BaselineSpec& spec);

/// Raw weight of every training sample at its final loss, tagged clean/noisy.
std::vector<WeightSample> weight_distribution(const TrainState& state, const BiasedDataset& train_set,
                                              const TrainOptions& options = {});

/// Training, meta and test sets for one seed of an experiment.
struct ExperimentData {
  BiasedDataset pool;  // generated or loaded data before the meta split
  BiasedDataset train;
  BiasedDataset meta;
  BiasedDataset test;
};

ExperimentData build_data(const ExperimentConfig& config, std::uint64_t seed);

/// Initial classifier and weight net for one seed.
TrainState initial_state(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed);

/// Config with epochs converted to iterations for this training set.
TrainConfig resolve_train_config(const ExperimentConfig& config, std::size_t train_size, std::uint64_t seed);

struct RunOutput {
  RunReport report;
  TrainState state;
};

/// Trains with the weight net (or the given baseline) and assembles the report.
RunOutput run_single(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed,
                     const std::optional<BaselineSpec>& baseline = std::nullopt);

RunOutput run_baseline(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed,
                       const BaselineSpec& baseline);

struct SeedResult {
  std::uint64_t seed = 0;
  RunReport mwnet;
  TrainState state;
  std::optional<RunReport> baseline;
};

struct ExperimentResult {
  std::vector<SeedResult> runs;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::optional<double> baseline_mean_accuracy;
  std::optional<double> baseline_std_accuracy;
};

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<BaselineSpec>& baseline = std::nullopt);

struct GradcheckResult {
  std::size_t instances = 0;
  std::size_t theta_params = 0;
  std::vector<double> rel_errors;  // ||analytic - fd|| / max(1, ||fd||) per instance
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Analytic vs finite-difference meta-gradient over config.gradcheck.instances
/// random instances drawn from the config's task. The weight net may have at
/// most kGradcheckMaxThetaParams parameters. flip_sign negates the analytic
/// gradient (checker self-test).
inline constexpr std::size_t kGradcheckMaxThetaParams = 60;
GradcheckResult gradcheck(const ExperimentConfig& config, std::uint64_t seed, bool flip_sign = false);

/// Population mean and standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& values);

// Report files: metrics.csv, weight_curve.csv, weight_dist.csv, stability.csv,
// confusion.csv, config.json.
void write_report(const std::filesystem::path& dir, const RunReport& report);
RunReport read_report(const std::filesystem::path& dir);

std::string curve_csv(const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> read_curve_csv(const std::filesystem::path& path);

/// Classifier and weight net parameters as JSON.
nlohmann::json model_to_json(const TrainState& state);
TrainState model_from_json(const nlohmann::json& j);

/// Writes every seed's run under dir/seed_<s>/ (baseline under
/// dir/seed_<s>/baseline_<kind>/) plus dir/summary.csv.
void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result,
                      const std::optional<BaselineSpec>& baseline);

/// Single-file SVG line plot.
std::string svg_line_plot(const std::vector<double>& x, const std::vector<double>& y, const std::string& title,
                          const std::string& xlabel, const std::string& ylabel);

}  // namespace mwnet
