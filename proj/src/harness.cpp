#include "mwnet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mwnet/csv.hpp"
#include "mwnet/errors.hpp"
#include "mwnet/rng.hpp"

namespace mwnet {

using nlohmann::json;

namespace {

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) { return Rng(seed).split(stream).next_u64(); }

double percentile99(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

bool same_curve(const std::vector<CurvePoint>& a, const std::vector<CurvePoint>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const CurvePoint& x, const CurvePoint& y) { return x.loss == y.loss && x.weight == y.weight; });
}

bool same_metrics(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const EpochRecord& x, const EpochRecord& y) {
    return x.epoch == y.epoch && x.train_loss == y.train_loss && x.meta_loss == y.meta_loss &&
           x.test_accuracy == y.test_accuracy && x.meta_grad_norm == y.meta_grad_norm;
  });
}

bool same_stability(const std::vector<StabilityPoint>& a, const std::vector<StabilityPoint>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const StabilityPoint& x, const StabilityPoint& y) {
    return x.epoch == y.epoch && x.mean_abs_delta == y.mean_abs_delta && x.std_abs_delta == y.std_abs_delta;
  });
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json layers_to_json(const std::vector<LayerSpec>& layers) {
  json arr = json::array();
  for (const auto& l : layers)
    arr.push_back({{"input_dim", l.input_dim}, {"output_dim", l.output_dim}, {"activation", to_string(l.activation)}});
  return arr;
}

std::vector<LayerSpec> layers_from_json(const json& arr) {
  std::vector<LayerSpec> layers;
  for (const auto& l : arr)
    layers.push_back({l.at("input_dim").get<std::size_t>(), l.at("output_dim").get<std::size_t>(),
                      activation_from_string(l.at("activation").get<std::string>())});
  return layers;
}

}  // namespace

std::vector<double> RunReport::accuracy_history() const {
  std::vector<double> v;
  for (const auto& e : metrics) v.push_back(e.test_accuracy);
  return v;
}

std::vector<double> RunReport::grad_norm_history() const {
  std::vector<double> v;
  for (const auto& e : metrics) v.push_back(e.meta_grad_norm);
  return v;
}

double RunReport::final_accuracy() const { return metrics.empty() ? 0.0 : metrics.back().test_accuracy; }

MonotonicityScore RunReport::monotonicity() const { return monotonicity_score(weight_curve); }

std::pair<double, double> RunReport::clean_noisy_means() const {
  double cs = 0.0, ns = 0.0;
  std::size_t cn = 0, nn = 0;
  for (const auto& s : weight_dist) {
    if (s.corrupted) {
      ns += s.weight;
      ++nn;
    } else {
      cs += s.weight;
      ++cn;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {cn ? cs / static_cast<double>(cn) : nan, nn ? ns / static_cast<double>(nn) : nan};
}

bool RunReport::operator==(const RunReport& other) const {
  return same_metrics(metrics, other.metrics) && final_confusion == other.final_confusion &&
         same_curve(weight_curve, other.weight_curve) && weight_dist == other.weight_dist &&
         same_stability(stability, other.stability) && config_echo == other.config_echo;
}

void BaselineSpec::validate() const {
  if (kind == BaselineKind::IncreasingRamp && !(gamma >= 0.0)) throw ConfigError("ramp exponent gamma must be >= 0");
  if (kind == BaselineKind::DecreasingStep && !(lambda > 0.0)) throw ConfigError("step threshold lambda must be > 0");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Uniform:
      return "uniform";
    case BaselineKind::IncreasingRamp:
      return "ramp";
    case BaselineKind::DecreasingStep:
      return "step";
  }
  return "uniform";
}

BaselineKind baseline_kind_from_string(const std::string& s) {
  if (s == "uniform") return BaselineKind::Uniform;
  if (s == "ramp") return BaselineKind::IncreasingRamp;
  if (s == "step") return BaselineKind::DecreasingStep;
  throw ConfigError("baseline must be one of uniform|ramp|step, got '" + s + "'");
}

WeightFn baseline_weights(const BaselineSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case BaselineKind::Uniform:
      return [](std::span<const double> losses) { return std::vector<double>(losses.size(), 1.0); };
    case BaselineKind::IncreasingRamp:
      return [gamma = spec.gamma](std::span<const double> losses) {
        double top = 0.0;
        for (double l : losses) top = std::max(top, l);
        std::vector<double> w(losses.size(), 1.0);
        if (top <= 0.0) return w;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::clamp(std::pow(losses[i] / top, gamma), 0.0, 1.0);
        return w;
      };
    case BaselineKind::DecreasingStep:
      return [lambda = spec.lambda](std::span<const double> losses) {
        std::vector<double> w(losses.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = losses[i] < lambda ? 1.0 : 0.0;
        return w;
      };
  }
  throw ConfigError("unknown baseline");
}

std::vector<WeightSample> weight_distribution(const TrainState& state, const BiasedDataset& train_set,
                                              const TrainOptions& options) {
  std::vector<std::size_t> all(train_set.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto w = sample_weights(state, train_set, all, options);
  std::vector<WeightSample> out;
  for (std::size_t i = 0; i < all.size(); ++i) out.push_back({train_set.ids[i], w[i], train_set.corrupted[i]});
  return out;
}

ExperimentData build_data(const ExperimentConfig& config, std::uint64_t seed) {
  BiasedDataset pool;
  BiasedDataset test;
  std::size_t per_class_pool = 0;
  if (config.dataset.gaussian) {
    const auto& g = *config.dataset.gaussian;
    GaussianMixtureSpec spec;
    spec.num_classes = g.classes;
    spec.dim = g.dim;
    spec.means = g.means ? *g.means : circle_means(g.classes, g.dim, g.radius);
    spec.scale = g.scale;
    spec.per_class_count = g.per_class_count;
    pool = gen_gaussians(spec, seed);
    spec.per_class_count = g.test_per_class;
    test = gen_gaussians(spec, derived_seed(seed, streams::kTestSet));
    per_class_pool = g.per_class_count;
  } else {
    std::ifstream tr(config.dataset.train_file);
    if (!tr) throw ConfigError("cannot open dataset.train_file " + config.dataset.train_file);
    pool = read_dataset_csv(tr);
    std::ifstream te(config.dataset.test_file);
    if (!te) throw ConfigError("cannot open dataset.test_file " + config.dataset.test_file);
    test = read_dataset_csv(te);
    per_class_pool = pool.size() == 0 ? 0 : *std::min_element(pool.class_counts.begin(), pool.class_counts.end());
  }

  // Meta set comes from clean data before any bias is injected.
  auto split = split_meta(pool, config.meta_per_class, seed);
  BiasedDataset train = std::move(split.remainder);
  if (config.bias.imbalance_factor) {
    const std::size_t base =
        config.bias.base_count.value_or(per_class_pool > config.meta_per_class ? per_class_pool - config.meta_per_class : 0);
    train = apply_longtail(train, {base, *config.bias.imbalance_factor}, seed);
  }
  if (config.bias.noise_kind) train = apply_noise(train, {*config.bias.noise_kind, config.bias.noise_rate, seed});
  return {std::move(pool), std::move(train), std::move(split.meta), std::move(test)};
}

TrainState initial_state(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed) {
  std::vector<LayerSpec> specs;
  std::size_t in = data.train.dim();
  for (std::size_t h : config.classifier_hidden) {
    specs.push_back({in, h, Activation::ReLU});
    in = h;
  }
  specs.push_back({in, data.train.num_classes, Activation::Identity});
  return TrainState(init_net(specs, derived_seed(seed, streams::kClassifierInit)),
                    init_mwnet(config.weight_net_hidden, derived_seed(seed, streams::kWeightNetInit)));
}

TrainConfig resolve_train_config(const ExperimentConfig& config, std::size_t train_size, std::uint64_t seed) {
  TrainConfig tc = config.optim;
  tc.seed = seed;
  const std::size_t per_epoch = iterations_per_epoch(train_size, tc.n);
  if (config.epochs) tc.T = *config.epochs * per_epoch;
  for (const auto& [epoch, mult] : config.lr_schedule_epochs) tc.lr_schedule.emplace_back(epoch * per_epoch, mult);
  tc.validate();
  return tc;
}

RunOutput run_single(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed,
                     const std::optional<BaselineSpec>& baseline) {
  const TrainConfig tc = resolve_train_config(config, data.train.size(), seed);
  TrainOptions options;
  options.tracked_count = config.tracked_count;
  if (baseline) options.fixed_weights = baseline_weights(*baseline);

  auto res = train(data.train, data.meta, data.test, initial_state(config, data, seed), tc, options);
  RunOutput out{{}, std::move(res.state)};
  auto& rep = out.report;
  rep.metrics = res.log.epochs;
  rep.final_confusion = evaluate(out.state.w, data.test).confusion;

  std::vector<std::size_t> all(data.train.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  double top = percentile99(batch_losses(out.state.w, make_batch(data.train, all), options.loss));
  if (!(top > 0.0)) top = 1.0;
  if (baseline) {
    std::vector<double> grid(config.probe_points);
    for (std::size_t k = 0; k < grid.size(); ++k)
      grid[k] = top * static_cast<double>(k) / static_cast<double>(grid.size() - 1);
    grid.back() = top;
    const auto w = options.fixed_weights(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) rep.weight_curve.push_back({grid[k], w[k]});
  } else {
    rep.weight_curve = probe_curve(out.state.theta, 0.0, top, config.probe_points);
  }
  rep.weight_dist = weight_distribution(out.state, data.train, options);
  rep.stability = stability_trace(res.log.tracked_weights);

  ExperimentConfig resolved = config;
  resolved.optim = tc;
  resolved.epochs.reset();
  resolved.lr_schedule_epochs.clear();
  resolved.seeds = {seed};
  rep.config_echo = {{"config", resolved.to_json()},
                     {"seed", seed},
                     {"method", baseline ? "baseline_" + to_string(baseline->kind) : std::string("mwnet")},
                     {"tracked", res.log.tracked},
                     {"warnings", res.log.warnings}};
  if (baseline) rep.config_echo["baseline"] = {{"gamma", baseline->gamma}, {"lambda", baseline->lambda}};
  return out;
}

RunOutput run_baseline(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed,
                       const BaselineSpec& baseline) {
  baseline.validate();
  return run_single(config, data, seed, baseline);
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::optional<BaselineSpec>& baseline) {
  if (baseline) baseline->validate();
  ExperimentResult result;
  std::vector<double> acc, base_acc;
  for (std::uint64_t seed : config.seeds) {
    const auto data = build_data(config, seed);
    auto run = run_single(config, data, seed);
    SeedResult sr{seed, std::move(run.report), std::move(run.state), std::nullopt};
    acc.push_back(sr.mwnet.final_accuracy());
    if (baseline) {
      sr.baseline = run_baseline(config, data, seed, *baseline).report;
      base_acc.push_back(sr.baseline->final_accuracy());
    }
    result.runs.push_back(std::move(sr));
  }
  std::tie(result.mean_accuracy, result.std_accuracy) = mean_std(acc);
  if (baseline) {
    const auto [m, s] = mean_std(base_acc);
    result.baseline_mean_accuracy = m;
    result.baseline_std_accuracy = s;
  }
  return result;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string s = "loss,weight\n";
  for (const auto& p : curve) s += csv::format(p.loss) + "," + csv::format(p.weight) + "\n";
  return s;
}

std::vector<CurvePoint> read_curve_csv(const std::filesystem::path& path) {
  const auto t = csv::read_file(path);
  const auto lc = t.column("loss");
  const auto wc = t.column("weight");
  std::vector<CurvePoint> out;
  for (const auto& r : t.rows) out.push_back({csv::parse_double(r[lc]), csv::parse_double(r[wc])});
  return out;
}

GradcheckResult gradcheck(const ExperimentConfig& config, std::uint64_t seed, bool flip_sign) {
  const auto theta_params = mwnet_specs(config.weight_net_hidden);
  std::size_t p = 0;
  for (const auto& l : theta_params) p += l.input_dim * l.output_dim + l.output_dim;
  if (p > kGradcheckMaxThetaParams)
    throw ConfigError("gradcheck needs a weight net with at most " + std::to_string(kGradcheckMaxThetaParams) +
                      " parameters, got " + std::to_string(p));
  if (config.gradcheck.instances == 0) throw ConfigError("gradcheck.instances must be positive");
  const ExperimentData data = build_data(config, seed);
  TrainConfig tc = config.optim;
  tc.validate();
  if (tc.n > data.train.size() || tc.m > data.meta.size())
    throw ConfigError("gradcheck batch sizes exceed the available samples");

  GradcheckResult res;
  res.instances = config.gradcheck.instances;
  res.theta_params = p;
  const Rng base(derived_seed(seed, streams::kGradcheck));
  for (std::size_t k = 0; k < res.instances; ++k) {
    Rng r = base.split(k);
    TrainState st = initial_state(config, data, r.next_u64());
    // Fully random weight net so every theta entry carries gradient.
    st.theta = MWNet(init_net(mwnet_specs(config.weight_net_hidden), r.next_u64()));
    const auto tb = make_batch(data.train, sample_batch(data.train.size(), tc.n, r));
    const auto mb = make_batch(data.meta, sample_batch(data.meta.size(), tc.m, r));
    auto a = meta_gradient_direct(st, tb, mb, tc.alpha, tc).grad_theta;
    const auto f = meta_gradient_fd(st, tb, mb, tc.alpha, config.gradcheck.eps, tc);
    if (flip_sign)
      for (auto& v : a) v = -v;
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] - f[i]) * (a[i] - f[i]);
    const double err = std::sqrt(diff) / std::max(1.0, norm2(f));
    res.rel_errors.push_back(err);
    res.max_rel_error = std::max(res.max_rel_error, err);
  }
  res.passed = res.max_rel_error <= config.gradcheck.tolerance;
  return res;
}

void write_report(const std::filesystem::path& dir, const RunReport& report) {
  std::filesystem::create_directories(dir);

  std::string m = "epoch,train_loss,meta_loss,test_accuracy,meta_grad_norm\n";
  for (const auto& e : report.metrics)
    m += std::to_string(e.epoch) + "," + csv::format(e.train_loss) + "," + csv::format(e.meta_loss) + "," +
         csv::format(e.test_accuracy) + "," + csv::format(e.meta_grad_norm) + "\n";
  csv::write_file(dir / "metrics.csv", m);

  csv::write_file(dir / "weight_curve.csv", curve_csv(report.weight_curve));

  std::string d = "sample_id,weight,corrupted\n";
  for (const auto& s : report.weight_dist)
    d += std::to_string(s.sample_id) + "," + csv::format(s.weight) + "," + (s.corrupted ? "1" : "0") + "\n";
  csv::write_file(dir / "weight_dist.csv", d);

  std::string st = "epoch,mean_abs_delta,std_abs_delta\n";
  for (const auto& p : report.stability)
    st += std::to_string(p.epoch) + "," + csv::format(p.mean_abs_delta) + "," + csv::format(p.std_abs_delta) + "\n";
  csv::write_file(dir / "stability.csv", st);

  std::string c = "true";
  for (std::size_t k = 0; k < report.final_confusion.size(); ++k) c += ",pred_" + std::to_string(k);
  c += "\n";
  for (std::size_t r = 0; r < report.final_confusion.size(); ++r) {
    c += std::to_string(r);
    for (auto v : report.final_confusion[r]) c += "," + std::to_string(v);
    c += "\n";
  }
  csv::write_file(dir / "confusion.csv", c);

  csv::write_file(dir / "config.json", report.config_echo.dump(2) + "\n");
}

RunReport read_report(const std::filesystem::path& dir) {
  RunReport rep;
  {
    const auto t = csv::read_file(dir / "metrics.csv");
    for (const auto& r : t.rows)
      rep.metrics.push_back({static_cast<std::size_t>(csv::parse_int(r[t.column("epoch")])),
                             csv::parse_double(r[t.column("train_loss")]), csv::parse_double(r[t.column("meta_loss")]),
                             csv::parse_double(r[t.column("test_accuracy")]),
                             csv::parse_double(r[t.column("meta_grad_norm")])});
  }
  rep.weight_curve = read_curve_csv(dir / "weight_curve.csv");
  {
    const auto t = csv::read_file(dir / "weight_dist.csv");
    for (const auto& r : t.rows)
      rep.weight_dist.push_back({static_cast<std::size_t>(csv::parse_int(r[t.column("sample_id")])),
                                 csv::parse_double(r[t.column("weight")]), csv::parse_int(r[t.column("corrupted")]) != 0});
  }
  {
    const auto t = csv::read_file(dir / "stability.csv");
    for (const auto& r : t.rows)
      rep.stability.push_back({static_cast<std::size_t>(csv::parse_int(r[t.column("epoch")])),
                               csv::parse_double(r[t.column("mean_abs_delta")]),
                               csv::parse_double(r[t.column("std_abs_delta")])});
  }
  {
    const auto t = csv::read_file(dir / "confusion.csv");
    for (const auto& r : t.rows) {
      std::vector<std::size_t> row;
      for (std::size_t k = 1; k < r.size(); ++k) row.push_back(static_cast<std::size_t>(csv::parse_int(r[k])));
      rep.final_confusion.push_back(std::move(row));
    }
  }
  rep.config_echo = json::parse(read_text(dir / "config.json"));
  return rep;
}

json model_to_json(const TrainState& state) {
  return {{"classifier", {{"layers", layers_to_json(state.w.layers())}, {"params", state.w.params()}}},
          {"weight_net", {{"layers", layers_to_json(state.theta.net().layers())}, {"params", state.theta.params()}}},
          {"iteration", state.iteration}};
}

TrainState model_from_json(const json& j) {
  try {
    const auto& c = j.at("classifier");
    const auto& v = j.at("weight_net");
    TrainState st(DenseNet(layers_from_json(c.at("layers")), c.at("params").get<std::vector<double>>()),
                  MWNet(DenseNet(layers_from_json(v.at("layers")), v.at("params").get<std::vector<double>>())));
    st.iteration = j.value("iteration", std::size_t{0});
    return st;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result,
                      const std::optional<BaselineSpec>& baseline) {
  std::filesystem::create_directories(dir);
  std::string summary = "seed,method,final_accuracy,monotonicity,clean_weight_mean,noisy_weight_mean\n";
  auto row = [&](std::uint64_t seed, const std::string& method, const RunReport& r) {
    const auto [clean, noisy] = r.clean_noisy_means();
    summary += std::to_string(seed) + "," + method + "," + csv::format(r.final_accuracy()) + "," +
               csv::format(r.monotonicity().rho) + "," + csv::format(clean) + "," + csv::format(noisy) + "\n";
  };
  for (const auto& run : result.runs) {
    const auto run_dir = dir / ("seed_" + std::to_string(run.seed));
    write_report(run_dir, run.mwnet);
    csv::write_file(run_dir / "model.json", model_to_json(run.state).dump() + "\n");
    row(run.seed, "mwnet", run.mwnet);
    if (run.baseline) {
      const std::string name = "baseline_" + to_string(baseline->kind);
      write_report(run_dir / name, *run.baseline);
      row(run.seed, name, *run.baseline);
    }
  }
  csv::write_file(dir / "summary.csv", summary);

  std::string agg = "method,runs,mean_accuracy,std_accuracy\n";
  agg += "mwnet," + std::to_string(result.runs.size()) + "," + csv::format(result.mean_accuracy) + "," +
         csv::format(result.std_accuracy) + "\n";
  if (result.baseline_mean_accuracy)
    agg += "baseline_" + to_string(baseline->kind) + "," + std::to_string(result.runs.size()) + "," +
           csv::format(*result.baseline_mean_accuracy) + "," + csv::format(*result.baseline_std_accuracy) + "\n";
  csv::write_file(dir / "aggregate.csv", agg);
}

std::string svg_line_plot(const std::vector<double>& x, const std::vector<double>& y, const std::string& title,
                          const std::string& xlabel, const std::string& ylabel) {
  constexpr double W = 480, H = 320, L = 60, R = 20, T = 40, B = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!x.empty()) {
    x0 = *std::min_element(x.begin(), x.end());
    x1 = *std::max_element(x.begin(), x.end());
    y0 = std::min(0.0, *std::min_element(y.begin(), y.end()));
    y1 = std::max(1.0, *std::max_element(y.begin(), y.end()));
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  auto f = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"240\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
  s += "<line x1=\"" + f(L) + "\" y1=\"" + f(H - B) + "\" x2=\"" + f(W - R) + "\" y2=\"" + f(H - B) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + f(L) + "\" y1=\"" + f(T) + "\" x2=\"" + f(L) + "\" y2=\"" + f(H - B) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"240\" y=\"310\" text-anchor=\"middle\" font-size=\"12\">" + xlabel + "</text>\n";
  s += "<text x=\"14\" y=\"160\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 160)\">" + ylabel +
       "</text>\n";
  s += "<text x=\"" + f(L) + "\" y=\"" + f(H - B + 16) + "\" font-size=\"10\">" + f(x0) + "</text>\n";
  s += "<text x=\"" + f(W - R) + "\" y=\"" + f(H - B + 16) + "\" text-anchor=\"end\" font-size=\"10\">" + f(x1) +
       "</text>\n";
  s += "<text x=\"" + f(L - 4) + "\" y=\"" + f(H - B) + "\" text-anchor=\"end\" font-size=\"10\">" + f(y0) + "</text>\n";
  s += "<text x=\"" + f(L - 4) + "\" y=\"" + f(T + 4) + "\" text-anchor=\"end\" font-size=\"10\">" + f(y1) + "</text>\n";
  s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? " " : "") + f(px(x[i])) + "," + f(py(y[i]));
  s += "\"/>\n</svg>\n";
  return s;
}

}  // namespace mwnet
