#include <cmath>
#include <limits>

#include "doctest.h"
#include "mwnet/errors.hpp"
#include "mwnet/weightnet.hpp"
#include "support.hpp"

using namespace mwnet;
using namespace testing;

namespace {

MWNet zero_theta(const std::vector<std::size_t>& hidden = {5}) {
  const DenseNet net = init_net(mwnet_specs(hidden), 1);
  return MWNet(DenseNet(net.layers(), std::vector<double>(net.param_count(), 0.0)));
}

}  // namespace

TEST_CASE("MWNet shape checks") {
  CHECK_THROWS_AS(MWNet(init_net({{2, 5, Activation::ReLU}, {5, 1, Activation::Sigmoid}}, 1)), ShapeError);
  CHECK_THROWS_AS(MWNet(init_net({{1, 5, Activation::ReLU}, {5, 2, Activation::Sigmoid}}, 1)), ShapeError);
  CHECK_THROWS_AS(MWNet(init_net({{1, 5, Activation::ReLU}, {5, 1, Activation::Identity}}, 1)), ShapeError);
  CHECK_NOTHROW(MWNet(init_net(mwnet_specs({10, 10}), 1)));
}

TEST_CASE("architecture strings") {
  CHECK(parse_architecture("1-100-1") == std::vector<std::size_t>{100});
  CHECK(parse_architecture("1-10-10-10-1") == std::vector<std::size_t>{10, 10, 10});
  CHECK(format_architecture({100, 100}) == "1-100-100-1");
  for (const char* bad : {"2-100-1", "1-100-2", "1-0-1", "1-x-1", "", "1--1"})
    CHECK_THROWS_AS(parse_architecture(bad), ConfigError);
  CHECK(mwnet_specs({50}).size() == 2);
  CHECK(mwnet_specs({50}).back().activation == Activation::Sigmoid);
}

TEST_CASE("fresh weight net is neutral") {
  const MWNet theta = init_mwnet({100}, 4);
  CHECK(theta.param_count() == 301);
  for (const auto& p : probe_curve(theta, 0.0, 20.0, 50)) CHECK(std::abs(p.weight - 0.5) <= 0.2);
  CHECK(init_mwnet({100}, 4) == theta);
}

TEST_CASE("mw_forward examples") {
  SUBCASE("zero theta gives 0.5") {
    const std::vector<double> l{0.0, 1.0, 7.5, 100.0};
    for (double w : mw_forward(zero_theta(), l)) CHECK(w == 0.5);
  }
  SUBCASE("pure function of the scalar") {
    const MWNet theta = random_mwnet({5}, 3);
    const std::vector<double> l{1.7, 1.7};
    const auto w = mw_forward(theta, l);
    CHECK(w[0] == w[1]);
  }
  SUBCASE("matches nnet forward on a one-column batch") {
    const MWNet theta = random_mwnet({10, 10}, 5);
    Rng r(5);
    std::vector<double> l(20);
    for (auto& v : l) v = 5.0 * r.uniform();
    const auto w = mw_forward(theta, l);
    const auto out = forward(theta.net(), Matrix(20, 1, l)).outputs;
    for (std::size_t i = 0; i < 20; ++i) CHECK(w[i] == out(i, 0));
  }
  SUBCASE("non-finite loss") {
    const std::vector<double> l{1.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(mw_forward(zero_theta(), l), NumericError);
  }
}

TEST_CASE("weights stay in [0, 1]") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const MWNet theta = random_mwnet({20}, seed, 3.0);
    Rng r(seed, 3);
    std::vector<double> l(50);
    for (auto& v : l) v = std::exp(8.0 * r.uniform()) - 1.0;
    for (double w : mw_forward(theta, l)) {
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
    }
  }
}

TEST_CASE("mw_jacobian") {
  SUBCASE("matches finite differences on a 1-5-1 net") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const MWNet theta = random_mwnet({5}, seed);
      Rng r(seed, 4);
      std::vector<double> l(6);
      for (auto& v : l) v = 3.0 * r.uniform();
      const Matrix J = mw_jacobian(theta, l);
      REQUIRE(J.rows() == 6);
      REQUIRE(J.cols() == 16);
      for (std::size_t j = 0; j < l.size(); ++j) {
        const auto fd = fd_gradient(
            [&](std::span<const double> p) {
              const MWNet t(DenseNet(theta.net().layers(), {p.begin(), p.end()}));
              return mw_forward(t, std::vector<double>{l[j]})[0];
            },
            theta.params(), 1e-5);
        CHECK(rel_err({J.row(j).begin(), J.row(j).end()}, fd) <= 1e-4);
      }
    }
  }
  SUBCASE("constant network gives identical rows") {
    auto p = random_mwnet({5}, 2).params();
    const DenseNet ref = init_net(mwnet_specs({5}), 1);
    for (std::size_t k = 0; k < ref.bias_offset(0) + 5; ++k) p[k] = 0.0;
    const MWNet theta(DenseNet(ref.layers(), p));
    const Matrix J = mw_jacobian(theta, std::vector<double>{0.1, 2.0, 9.0});
    for (std::size_t k = 0; k < J.cols(); ++k) {
      CHECK(J(0, k) == J(1, k));
      CHECK(J(0, k) == J(2, k));
    }
  }
  SUBCASE("single loss equals the nnet per-sample row") {
    const MWNet theta = random_mwnet({8}, 6);
    const Matrix x(1, 1, std::vector<double>{1.3});
    const auto fw = forward(theta.net(), x);
    const Matrix g = per_sample_gradients(theta.net(), fw.cache, Matrix(1, 1, 1.0));
    CHECK(mw_jacobian(theta, std::vector<double>{1.3}) == g);
  }
  SUBCASE("directional finite differences") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const MWNet theta = random_mwnet({10, 10}, seed);
      Rng r(seed, 8);
      std::vector<double> l(5), dir(theta.param_count());
      for (auto& v : l) v = 4.0 * r.uniform();
      for (auto& v : dir) v = r.normal();
      const Matrix J = mw_jacobian(theta, l);
      const double h = 1e-5;
      std::vector<double> pp = theta.params(), pm = theta.params();
      for (std::size_t k = 0; k < dir.size(); ++k) {
        pp[k] += h * dir[k];
        pm[k] -= h * dir[k];
      }
      const auto wp = mw_forward(MWNet(DenseNet(theta.net().layers(), pp)), l);
      const auto wm = mw_forward(MWNet(DenseNet(theta.net().layers(), pm)), l);
      std::vector<double> a(l.size()), f(l.size());
      for (std::size_t j = 0; j < l.size(); ++j) {
        a[j] = dot(J.row(j), dir);
        f[j] = (wp[j] - wm[j]) / (2 * h);
      }
      CHECK(rel_err(a, f) <= 1e-4);
    }
  }
}

TEST_CASE("normalize examples") {
  CHECK(normalize(std::vector<double>{0.5, 0.5, 0.5, 0.5}, kDefaultTau) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK(normalize(std::vector<double>{0.0, 0.0, 0.0}, 0.3) == std::vector<double>{0.0, 0.0, 0.0});
  const auto e = normalize(std::vector<double>{0.2, 0.8}, kDefaultTau);
  CHECK(e[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(e[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(normalize(std::vector<double>{0.5}, 0.0), ConfigError);
  CHECK_THROWS_AS(normalize(std::vector<double>{0.5}, -1.0), ConfigError);
  CHECK_THROWS_AS(normalize(std::vector<double>{1.5}, kDefaultTau), NumericError);
  CHECK_THROWS_AS(normalize(std::vector<double>{-0.1}, kDefaultTau), NumericError);
}

TEST_CASE("normalization partition over random weight vectors") {
  Rng r(2024);
  std::size_t zero_cases = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + r.below(64);
    std::vector<double> raw(n);
    const bool all_zero = r.below(10) == 0;
    for (auto& v : raw) v = all_zero ? 0.0 : (r.below(4) == 0 ? 0.0 : r.uniform());
    double raw_sum = 0.0;
    for (double v : raw) raw_sum += v;
    const auto eta = normalize(raw, kDefaultTau);
    double s = 0.0;
    for (double v : eta) s += v;
    if (raw_sum > 0) {
      CHECK(std::abs(s - 1.0) <= 1e-12);
    } else {
      ++zero_cases;
      for (double v : eta) CHECK(v == 0.0);
    }
    if (raw_sum > 0) {
      std::vector<double> scaled(raw);
      const double c = 0.25 + 0.75 * r.uniform();
      for (auto& v : scaled) v *= c;
      const auto eta2 = normalize(scaled, kDefaultTau);
      for (std::size_t i = 0; i < n; ++i) CHECK(eta2[i] == doctest::Approx(eta[i]).epsilon(1e-12));
    }
  }
  CHECK(zero_cases > 500);
}

TEST_CASE("make_weights keeps both views") {
  const auto w = make_weights({0.1, 0.3}, 1e-6);
  CHECK(w.raw == std::vector<double>{0.1, 0.3});
  CHECK(w.normalized[1] == doctest::Approx(0.75));
  CHECK(w.tau == 1e-6);
}

TEST_CASE("probe_curve examples") {
  SUBCASE("zero theta is flat") {
    for (const auto& p : probe_curve(zero_theta(), 0.0, 3.0, 11)) CHECK(p.weight == 0.5);
  }
  SUBCASE("two steps are the endpoints") {
    const auto c = probe_curve(random_mwnet({5}, 1), 0.25, 10.0, 2);
    REQUIRE(c.size() == 2);
    CHECK(c[0].loss == 0.25);
    CHECK(c[1].loss == 10.0);
  }
  SUBCASE("consistent with mw_forward") {
    const MWNet theta = random_mwnet({10}, 2);
    const auto c = probe_curve(theta, 0.0, 7.0, 33);
    CHECK(c.back().loss == 7.0);
    std::vector<double> grid;
    for (const auto& p : c) grid.push_back(p.loss);
    const auto w = mw_forward(theta, grid);
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(c[i].weight == w[i]);
      CHECK(c[i].loss == doctest::Approx(7.0 * static_cast<double>(i) / 32).epsilon(1e-14));
    }
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(probe_curve(zero_theta(), 1.0, 1.0, 5), ConfigError);
    CHECK_THROWS_AS(probe_curve(zero_theta(), 2.0, 1.0, 5), ConfigError);
    CHECK_THROWS_AS(probe_curve(zero_theta(), 0.0, 1.0, 1), ConfigError);
  }
}
