#include "mwnet/config.hpp"

#include <fstream>
#include <set>

#include "mwnet/errors.hpp"
#include "mwnet/weightnet.hpp"

namespace mwnet {

using nlohmann::json;

namespace {

// Accessor for one JSON object that rejects unknown keys once finished.
class Block {
 public:
  Block(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError("missing required field '" + field(key) + "'");
    return obj_.at(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError("field '" + field(key) + "' has the wrong type");
    }
  }

  template <typename T>
  void maybe(const std::string& key, T& out) {
    if (has(key)) out = get<T>(key);
  }

  std::size_t count(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError("field '" + field(key) + "' must be a non-negative integer");
    return v.get<std::size_t>();
  }

  void maybe_count(const std::string& key, std::size_t& out) {
    if (has(key)) out = count(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError("field '" + field(key) + "' must be a number");
    return v.get<double>();
  }

  void maybe_number(const std::string& key, double& out) {
    if (has(key)) out = number(key);
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items())
      if (!seen_.contains(k)) throw ConfigError("unknown config key '" + field(k) + "'");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<std::pair<std::size_t, double>> parse_schedule(const json& v, const std::string& name) {
  std::vector<std::pair<std::size_t, double>> out;
  if (!v.is_array()) throw ConfigError("field '" + name + "' must be a list of [step, multiplier] pairs");
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number())
      throw ConfigError("field '" + name + "' must be a list of [step, multiplier] pairs");
    out.emplace_back(e[0].get<std::size_t>(), e[1].get<double>());
  }
  return out;
}

std::vector<std::size_t> parse_widths(const json& v, const std::string& name) {
  std::vector<std::size_t> out;
  if (!v.is_array()) throw ConfigError("field '" + name + "' must be a list of layer widths");
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 1)
      throw ConfigError("field '" + name + "' must contain positive integers");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

}  // namespace

std::string to_string(NoiseKind kind) { return kind == NoiseKind::Uniform ? "uniform" : "flip"; }

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "uniform") return NoiseKind::Uniform;
  if (s == "flip") return NoiseKind::Flip;
  throw ConfigError("noise kind must be 'uniform' or 'flip', got '" + s + "'");
}

ExperimentConfig parse_experiment_config(const json& doc) {
  ExperimentConfig cfg;
  cfg.source = doc;
  Block root(doc, "");

  {
    Block ds(root.at("dataset"), "dataset");
    const bool has_gauss = ds.has("gaussian");
    const bool has_file = ds.has("train_file");
    if (has_gauss == has_file) throw ConfigError("dataset needs exactly one of 'gaussian' or 'train_file'");
    if (has_gauss) {
      Block g(ds.at("gaussian"), "dataset.gaussian");
      GaussianBlock gb;
      g.maybe_count("classes", gb.classes);
      g.maybe_count("dim", gb.dim);
      g.maybe_number("radius", gb.radius);
      g.maybe_number("scale", gb.scale);
      g.maybe_count("per_class_count", gb.per_class_count);
      g.maybe_count("test_per_class", gb.test_per_class);
      if (g.has("means")) {
        const auto rows = g.get<std::vector<std::vector<double>>>("means");
        Matrix means(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != means.cols()) throw ConfigError("dataset.gaussian.means rows differ in length");
          for (std::size_t c = 0; c < means.cols(); ++c) means(r, c) = rows[r][c];
        }
        gb.means = means;
      }
      g.finish();
      cfg.dataset.gaussian = gb;
    } else {
      cfg.dataset.train_file = ds.get<std::string>("train_file");
      cfg.dataset.test_file = ds.get<std::string>("test_file");
    }
    ds.finish();
  }

  if (root.has("bias")) {
    Block b(root.at("bias"), "bias");
    if (b.has("imbalance")) {
      Block im(b.at("imbalance"), "bias.imbalance");
      cfg.bias.imbalance_factor = im.number("factor");
      if (im.has("base_count")) cfg.bias.base_count = im.count("base_count");
      im.finish();
    }
    if (b.has("noise")) {
      Block nz(b.at("noise"), "bias.noise");
      cfg.bias.noise_kind = noise_kind_from_string(nz.get<std::string>("kind"));
      cfg.bias.noise_rate = nz.number("rate");
      nz.finish();
    }
    b.finish();
  }

  {
    Block meta(root.at("meta"), "meta");
    cfg.meta_per_class = meta.count("per_class");
    meta.finish();
  }

  {
    Block model(root.at("model"), "model");
    if (model.has("classifier_hidden"))
      cfg.classifier_hidden = parse_widths(model.at("classifier_hidden"), "model.classifier_hidden");
    if (model.has("weight_net")) cfg.weight_net_hidden = parse_architecture(model.get<std::string>("weight_net"));
    model.finish();
  }

  {
    Block o(root.at("optim"), "optim");
    auto& t = cfg.optim;
    o.maybe_number("alpha", t.alpha);
    o.maybe_number("beta", t.beta);
    o.maybe_count("n", t.n);
    o.maybe_count("m", t.m);
    const bool has_t = o.has("T");
    const bool has_epochs = o.has("epochs");
    if (has_t && has_epochs) throw ConfigError("optim takes either 'T' or 'epochs', not both");
    if (has_t) t.T = o.count("T");
    if (has_epochs) cfg.epochs = o.count("epochs");
    o.maybe_number("tau", t.tau);
    o.maybe("normalize", t.normalize);
    o.maybe_number("momentum", t.classifier_momentum);
    o.maybe_number("weight_decay", t.classifier_weight_decay);
    o.maybe("plain_classifier_step", t.plain_classifier_step);
    if (o.has("lr_schedule")) t.lr_schedule = parse_schedule(o.at("lr_schedule"), "optim.lr_schedule");
    if (o.has("lr_schedule_epochs"))
      cfg.lr_schedule_epochs = parse_schedule(o.at("lr_schedule_epochs"), "optim.lr_schedule_epochs");
    o.maybe_number("beta_decay_iterations", t.beta_decay_iterations);
    o.maybe_count("tracked_count", cfg.tracked_count);
    o.maybe_count("probe_points", cfg.probe_points);
    o.finish();
    t.validate();
  }

  if (root.has("output")) {
    Block out(root.at("output"), "output");
    out.maybe("dir", cfg.output_dir);
    out.finish();
  }

  if (root.has("seeds")) {
    cfg.seeds = root.get<std::vector<std::uint64_t>>("seeds");
    if (cfg.seeds.empty()) throw ConfigError("field 'seeds' must not be empty");
  }

  if (root.has("gradcheck")) {
    Block g(root.at("gradcheck"), "gradcheck");
    g.maybe_count("instances", cfg.gradcheck.instances);
    g.maybe_number("eps", cfg.gradcheck.eps);
    g.maybe_number("tolerance", cfg.gradcheck.tolerance);
    g.finish();
  }

  root.finish();
  if (cfg.probe_points < 10) throw ConfigError("optim.probe_points must be at least 10");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_experiment_config(doc);
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  if (dataset.gaussian) {
    const auto& g = *dataset.gaussian;
    json gj{{"classes", g.classes}, {"dim", g.dim},        {"radius", g.radius},
            {"scale", g.scale},     {"per_class_count", g.per_class_count}, {"test_per_class", g.test_per_class}};
    if (g.means) {
      std::vector<std::vector<double>> rows;
      for (std::size_t r = 0; r < g.means->rows(); ++r) {
        auto row = g.means->row(r);
        rows.emplace_back(row.begin(), row.end());
      }
      gj["means"] = rows;
    }
    j["dataset"] = {{"gaussian", gj}};
  } else {
    j["dataset"] = {{"train_file", dataset.train_file}, {"test_file", dataset.test_file}};
  }
  json bias = json::object();
  if (this->bias.imbalance_factor) {
    bias["imbalance"] = {{"factor", *this->bias.imbalance_factor}};
    if (this->bias.base_count) bias["imbalance"]["base_count"] = *this->bias.base_count;
  }
  if (this->bias.noise_kind)
    bias["noise"] = {{"kind", to_string(*this->bias.noise_kind)}, {"rate", this->bias.noise_rate}};
  j["bias"] = bias;
  j["meta"] = {{"per_class", meta_per_class}};
  j["model"] = {{"classifier_hidden", classifier_hidden}, {"weight_net", format_architecture(weight_net_hidden)}};
  json o{{"alpha", optim.alpha},
         {"beta", optim.beta},
         {"n", optim.n},
         {"m", optim.m},
         {"tau", optim.tau},
         {"normalize", optim.normalize},
         {"momentum", optim.classifier_momentum},
         {"weight_decay", optim.classifier_weight_decay},
         {"plain_classifier_step", optim.plain_classifier_step},
         {"lr_schedule", optim.lr_schedule},
         {"beta_decay_iterations", optim.beta_decay_iterations},
         {"tracked_count", tracked_count},
         {"probe_points", probe_points}};
  if (epochs) {
    o["epochs"] = *epochs;
  } else {
    o["T"] = optim.T;
  }
  if (!lr_schedule_epochs.empty()) o["lr_schedule_epochs"] = lr_schedule_epochs;
  j["optim"] = o;
  j["output"] = {{"dir", output_dir}};
  j["seeds"] = seeds;
  j["gradcheck"] = {{"instances", gradcheck.instances}, {"eps", gradcheck.eps}, {"tolerance", gradcheck.tolerance}};
  return j;
}

}  // namespace mwnet
