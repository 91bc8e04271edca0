#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mwnet/csv.hpp"
#include "mwnet/errors.hpp"
#include "mwnet/harness.hpp"

namespace fs = std::filesystem;
using namespace mwnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheckFailed = 3;

std::string dataset_text(const BiasedDataset& d) {
  std::ostringstream out;
  write_dataset_csv(out, d);
  return out.str();
}

ExperimentConfig load_with_seed(const std::string& path, const std::optional<std::uint64_t>& seed) {
  auto cfg = load_experiment_config(path);
  if (seed) cfg.seeds = {*seed};
  return cfg;
}

int cmd_gen_data(const std::string& config_path, const std::string& out, const std::optional<std::uint64_t>& seed) {
  const auto cfg = load_with_seed(config_path, seed);
  const auto data = build_data(cfg, cfg.seeds.front());
  const fs::path dir(out);
  fs::create_directories(dir);
  csv::write_file(dir / "pool.csv", dataset_text(data.pool));
  csv::write_file(dir / "train.csv", dataset_text(data.train));
  csv::write_file(dir / "meta.csv", dataset_text(data.meta));
  csv::write_file(dir / "test.csv", dataset_text(data.test));
  std::cout << "train " << data.train.size() << " meta " << data.meta.size() << " test " << data.test.size()
            << " -> " << dir.string() << "\n";
  return kExitOk;
}

int cmd_train(const std::string& config_path, std::string out, const std::optional<std::uint64_t>& seed,
              const std::optional<BaselineSpec>& baseline) {
  const auto cfg = load_with_seed(config_path, seed);
  if (out.empty()) out = cfg.output_dir;
  if (out.empty()) throw ConfigError("no output directory: set output.dir or pass --out");
  if (baseline) baseline->validate();
  const auto result = run_experiment(cfg, baseline);
  write_experiment(out, result, baseline);
  for (const auto& r : result.runs) {
    std::printf("seed %llu accuracy %s monotonicity %s\n", static_cast<unsigned long long>(r.seed),
                csv::format(r.mwnet.final_accuracy()).c_str(), csv::format(r.mwnet.monotonicity().rho).c_str());
    for (const auto& w : r.mwnet.config_echo.value("warnings", nlohmann::json::array()))
      std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
  }
  std::printf("mean accuracy %s std %s\n", csv::format(result.mean_accuracy).c_str(),
              csv::format(result.std_accuracy).c_str());
  if (result.baseline_mean_accuracy)
    std::printf("baseline %s mean accuracy %s std %s\n", to_string(baseline->kind).c_str(),
                csv::format(*result.baseline_mean_accuracy).c_str(),
                csv::format(*result.baseline_std_accuracy).c_str());
  return kExitOk;
}

int cmd_probe(const std::string& model_path, const std::string& config_path, const std::optional<std::uint64_t>& seed,
              double lo, double hi, std::size_t steps, const std::string& out) {
  std::optional<MWNet> theta;
  if (!model_path.empty()) {
    std::ifstream in(model_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open model file " + model_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed model file: ") + e.what());
    }
    theta = model_from_json(j).theta;
  } else if (!config_path.empty()) {
    const auto cfg = load_with_seed(config_path, seed);
    const auto data = build_data(cfg, cfg.seeds.front());
    theta = initial_state(cfg, data, cfg.seeds.front()).theta;
  } else {
    throw ConfigError("probe needs --model or --config");
  }
  const auto text = curve_csv(probe_curve(*theta, lo, hi, steps));
  if (out.empty())
    std::cout << text;
  else
    csv::write_file(out, text);
  return kExitOk;
}

int cmd_gradcheck(const std::string& config_path, const std::optional<std::uint64_t>& seed, bool flip_sign) {
  const auto cfg = load_with_seed(config_path, seed);
  const auto res = gradcheck(cfg, cfg.seeds.front(), flip_sign);
  for (std::size_t k = 0; k < res.rel_errors.size(); ++k)
    std::printf("instance %zu rel_error %.3e\n", k, res.rel_errors[k]);
  std::printf("instances %zu theta_params %zu max_rel_error %.3e tolerance %.1e %s\n", res.instances,
              res.theta_params, res.max_rel_error, cfg.gradcheck.tolerance, res.passed ? "PASS" : "FAIL");
  return res.passed ? kExitOk : kExitCheckFailed;
}

std::string render_report(const fs::path& dir) {
  const RunReport rep = read_report(dir);
  std::vector<double> ex, acc, lx, wy;
  for (const auto& e : rep.metrics) {
    ex.push_back(static_cast<double>(e.epoch));
    acc.push_back(e.test_accuracy);
  }
  for (const auto& p : rep.weight_curve) {
    lx.push_back(p.loss);
    wy.push_back(p.weight);
  }
  csv::write_file(dir / "weight_curve.svg", svg_line_plot(lx, wy, "Learned weighting function", "loss", "weight"));
  csv::write_file(dir / "accuracy.svg", svg_line_plot(ex, acc, "Test accuracy", "epoch", "accuracy"));

  const auto mono = rep.monotonicity();
  const auto [clean, noisy] = rep.clean_noisy_means();
  std::string s;
  s += "report " + dir.string() + "\n";
  s += "epochs " + std::to_string(rep.metrics.size()) + "\n";
  s += "final_accuracy " + csv::format(rep.final_accuracy()) + "\n";
  s += "monotonicity " + csv::format(mono.rho) + (mono.degenerate ? " (flat curve)" : "") + "\n";
  s += "clean_weight_mean " + csv::format(clean) + "\n";
  s += "noisy_weight_mean " + csv::format(noisy) + "\n";
  csv::write_file(dir / "summary.txt", s);
  return s;
}

int cmd_report(const std::string& dir_arg) {
  const fs::path dir(dir_arg);
  if (fs::exists(dir / "metrics.csv")) {
    std::cout << render_report(dir);
    return kExitOk;
  }
  if (!fs::exists(dir / "summary.csv")) throw std::runtime_error("missing metrics.csv in " + dir.string());
  std::vector<fs::path> runs;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "metrics.csv") runs.push_back(e.path().parent_path());
  std::sort(runs.begin(), runs.end());
  std::string all;
  for (const auto& r : runs) all += render_report(r) + "\n";
  csv::write_file(dir / "summary.txt", all);
  std::cout << all;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-Weight-Net training and analysis"};
  app.require_subcommand(1);

  std::string config, out, model, baseline_name, report_dir;
  std::optional<std::uint64_t> seed;
  double lo = 0.0, hi = 10.0, gamma = 1.0, lambda = 1.0;
  std::size_t steps = 200;
  bool flip_sign = false;

  auto* gen = app.add_subcommand("gen-data", "Generate the biased datasets of a config as CSV files");
  gen->add_option("--config", config, "Experiment config (JSON)")->required();
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--seed", seed, "Seed (defaults to the first config seed)");

  auto* tr = app.add_subcommand("train", "Train and write a report directory");
  tr->add_option("--config", config, "Experiment config (JSON)")->required();
  tr->add_option("--out", out, "Report directory (overrides output.dir)");
  tr->add_option("--seed", seed, "Run this single seed instead of the config's list");
  tr->add_option("--baseline", baseline_name, "Also train a fixed-weight baseline")
      ->check(CLI::IsMember({"uniform", "ramp", "step"}));
  tr->add_option("--gamma", gamma, "Ramp baseline exponent");
  tr->add_option("--lambda", lambda, "Step baseline threshold");

  auto* pr = app.add_subcommand("probe", "Evaluate a weight net on a loss grid");
  pr->add_option("--model", model, "model.json written by train");
  pr->add_option("--config", config, "Config for a freshly initialized weight net");
  pr->add_option("--seed", seed, "Initialization seed with --config");
  pr->add_option("--min", lo, "Smallest loss");
  pr->add_option("--max", hi, "Largest loss");
  pr->add_option("--steps", steps, "Number of grid points");
  pr->add_option("--out", out, "CSV path (stdout when omitted)");

  auto* gc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference meta-gradients");
  gc->add_option("--config", config, "Small-model config (JSON)")->required();
  gc->add_option("--seed", seed, "Seed (defaults to the first config seed)");
  gc->add_flag("--debug-flip-sign", flip_sign, "Negate the analytic gradient (checker self-test)");

  auto* rp = app.add_subcommand("report", "Render plots and a text summary for a report directory");
  rp->add_option("dir", report_dir, "Report or experiment directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(config, out, seed);
    if (tr->parsed()) {
      std::optional<BaselineSpec> baseline;
      if (!baseline_name.empty()) {
        BaselineSpec b;
        b.kind = baseline_name == "uniform" ? BaselineKind::Uniform
                 : baseline_name == "ramp"  ? BaselineKind::IncreasingRamp
                                            : BaselineKind::DecreasingStep;
        b.gamma = gamma;
        b.lambda = lambda;
        baseline = b;
      }
      return cmd_train(config, out, seed, baseline);
    }
    if (pr->parsed()) return cmd_probe(model, config, seed, lo, hi, steps, out);
    if (gc->parsed()) return cmd_gradcheck(config, seed, flip_sign);
    if (rp->parsed()) return cmd_report(report_dir);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
