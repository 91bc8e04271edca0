#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mwnet/csv.hpp"
#include "mwnet/harness.hpp"
#include "support.hpp"

using namespace mwnet;
using namespace testing;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(MWNET_SOURCE_DIR) / "configs";

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stdout and stderr captured.
Run cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli.log";
  const std::string cmd = "cd '" + dir.string() + "' && '" MWNET_CLI "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config(const char* name) { return "'" + (kConfigs / name).string() + "'"; }

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

const char* kTiny = R"({
  "dataset": {"gaussian": {"classes": 3, "dim": 2, "radius": 3.0, "per_class_count": 30, "test_per_class": 20}},
  "bias": {"noise": {"kind": "uniform", "rate": 0.4}},
  "meta": {"per_class": 4},
  "model": {"classifier_hidden": [8], "weight_net": "1-10-1"},
  "optim": {"alpha": 0.05, "beta": 0.01, "n": 16, "m": 6, "epochs": 2},
  "seeds": [1, 2]
})";

}  // namespace

TEST_CASE("cli gen-data is byte-deterministic") {
  TempDir dir("cli_gen");
  REQUIRE(cli("gen-data --config " + config("noise.json") + " --out a --seed 3", dir.path).code == 0);
  REQUIRE(cli("gen-data --config " + config("noise.json") + " --out b --seed 3", dir.path).code == 0);
  for (const char* f : {"pool.csv", "train.csv", "meta.csv", "test.csv"}) {
    CHECK(fs::exists(dir.path / "a" / f));
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
  }
  REQUIRE(cli("gen-data --config " + config("noise.json") + " --out c --seed 4", dir.path).code == 0);
  CHECK(slurp(dir.path / "a" / "train.csv") != slurp(dir.path / "c" / "train.csv"));
}

TEST_CASE("cli config errors exit 1 and name the field") {
  TempDir dir("cli_cfg");
  auto doc = nlohmann::json::parse(kTiny);
  doc.erase("meta");
  write_text(dir.path / "nometa.json", doc.dump());
  const auto r = cli("train --config nometa.json --out x", dir.path);
  CHECK(r.code == 1);
  CHECK(r.out.find("meta") != std::string::npos);

  doc = nlohmann::json::parse(kTiny);
  doc["dataset"]["gaussian"]["classes"] = 2;
  doc["bias"]["noise"]["kind"] = "flip";
  write_text(dir.path / "flip2.json", doc.dump());
  CHECK(cli("gen-data --config flip2.json --out y", dir.path).code != 0);

  write_text(dir.path / "tiny.json", kTiny);
  CHECK(cli("train --config tiny.json", dir.path).code == 1);
  CHECK(cli("train --config tiny.json --out z --baseline cosine", dir.path).code == 1);
  CHECK(cli("frobnicate", dir.path).code == 1);
}

TEST_CASE("cli train writes reports deterministically") {
  TempDir dir("cli_train");
  write_text(dir.path / "tiny.json", kTiny);
  REQUIRE(cli("train --config tiny.json --out a --baseline step --lambda 2", dir.path).code == 0);
  REQUIRE(cli("train --config tiny.json --out b --baseline step --lambda 2", dir.path).code == 0);
  CHECK(fs::exists(dir.path / "a" / "summary.csv"));
  for (const char* seed : {"seed_1", "seed_2"}) {
    CHECK(fs::is_directory(dir.path / "a" / seed / "baseline_step"));
    for (const char* f : {"metrics.csv", "weight_curve.csv", "weight_dist.csv", "stability.csv", "model.json"})
      CHECK(slurp(dir.path / "a" / seed / f) == slurp(dir.path / "b" / seed / f));
  }
  REQUIRE(cli("train --config tiny.json --out c --seed 2", dir.path).code == 0);
  CHECK(fs::exists(dir.path / "c" / "seed_2"));
  CHECK_FALSE(fs::exists(dir.path / "c" / "seed_1"));
}

TEST_CASE("cli probe") {
  TempDir dir("cli_probe");
  write_text(dir.path / "tiny.json", kTiny);
  REQUIRE(cli("train --config tiny.json --out run --seed 1", dir.path).code == 0);

  auto r = cli("probe --model run/seed_1/model.json --min 0 --max 10 --steps 2", dir.path);
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("loss,weight\n0,", 0) == 0);
  std::size_t lines = 0;
  for (char ch : r.out) lines += ch == '\n';
  CHECK(lines == 3);

  REQUIRE(cli("probe --model run/seed_1/model.json --min 0 --max 8 --steps 57 --out p.csv", dir.path).code == 0);
  std::ifstream mj(dir.path / "run" / "seed_1" / "model.json");
  const auto state = model_from_json(nlohmann::json::parse(mj));
  CHECK(slurp(dir.path / "p.csv") == curve_csv(probe_curve(state.theta, 0.0, 8.0, 57)));

  REQUIRE(cli("probe --config tiny.json --seed 5 --out fresh.csv", dir.path).code == 0);
  const auto fresh = read_curve_csv(dir.path / "fresh.csv");
  CHECK(fresh.size() == 200);
  for (const auto& p : fresh) CHECK(std::abs(p.weight - 0.5) <= 0.2);

  CHECK(cli("probe --model run/seed_1/model.json --steps 1", dir.path).code == 1);
  CHECK(cli("probe --model missing.json", dir.path).code != 0);
}

TEST_CASE("cli gradcheck") {
  TempDir dir("cli_gradcheck");
  auto r = cli("gradcheck --config " + config("gradcheck.json"), dir.path);
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  r = cli("gradcheck --config " + config("gradcheck.json") + " --debug-flip-sign", dir.path);
  CHECK(r.code == 3);
  CHECK(r.out.find("FAIL") != std::string::npos);

  std::ifstream in(kConfigs / "gradcheck.json");
  auto doc = nlohmann::json::parse(in);
  doc["optim"]["alpha"] = 0.0;
  write_text(dir.path / "alpha0.json", doc.dump());
  CHECK(cli("gradcheck --config alpha0.json", dir.path).code == 0);
}

TEST_CASE("cli report") {
  TempDir dir("cli_report");
  write_text(dir.path / "tiny.json", kTiny);
  REQUIRE(cli("train --config tiny.json --out run --seed 1", dir.path).code == 0);
  REQUIRE(cli("report run/seed_1", dir.path).code == 0);
  for (const char* f : {"weight_curve.svg", "accuracy.svg", "summary.txt"})
    CHECK(fs::exists(dir.path / "run" / "seed_1" / f));
  const std::string summary = slurp(dir.path / "run" / "seed_1" / "summary.txt");
  for (const char* key : {"epochs 2", "final_accuracy", "monotonicity", "clean_weight_mean", "noisy_weight_mean"})
    CHECK(summary.find(key) != std::string::npos);

  REQUIRE(cli("report run", dir.path).code == 0);
  const std::string first = slurp(dir.path / "run" / "summary.txt");
  REQUIRE(cli("report run", dir.path).code == 0);
  CHECK(slurp(dir.path / "run" / "summary.txt") == first);

  fs::create_directories(dir.path / "empty");
  CHECK(cli("report empty", dir.path).code != 0);
}

TEST_CASE("cli toy config runs quickly") {
  TempDir dir("cli_toy");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli("train --config " + config("toy.json") + " --out toy", dir.path);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(r.code == 0);
  CHECK(secs < 60.0);
  MESSAGE("toy config trained in " << secs << " s");
}
