#include "goursat/errors.h"
#include "goursat/stats.h"
#include "goursat/kernel.h"
#include "goursat/transform.h"

#include "helpers.h"

#include <cmath>
#include <random>

using namespace goursat;
using goursat::test::vec;
using goursat::test::within_band;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (auto& x : v) x = z(gen);
  return v;
}

GridPtr small_grid(double horizon = 1.0) {
  GridParams p = GridParams::defaults(horizon);
  p.delta = horizon / 512.0;
  return TimeGrid::build(p);
}

std::vector<SamplePath> ensemble(const GridPtr& g, std::size_t n, std::uint64_t seed) {
  return parallel_map<SamplePath>(n, [&](std::size_t i) { return sample_brownian(g, RngSpec{seed}, i); });
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("compensated sums") {
    CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1.0);
    CompensatedSum t;
    for (int i = 0; i < 10; ++i) t.add(0.1);
    CHECK(t.value() == 1.0);
  }

  TEST_CASE("mean estimate") {
    const auto e = mean_estimate({1.0, 2.0, 3.0, 4.0});
    CHECK(e.mean == 2.5);
    CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(e.n == 4);
    CHECK_THROWS_AS(mean_estimate({1.0}), ConfigError);
  }

  TEST_CASE("standard errors scale as N^-1/2") {
    const auto xs = normals(40000, 1);
    const std::vector<double> a(xs.begin(), xs.begin() + 10000);
    const double ratio_mean = mean_estimate(a).se / mean_estimate(xs).se;
    CHECK(ratio_mean >= 2.0 / 1.5);
    CHECK(ratio_mean <= 2.0 * 1.5);
    const auto ys = normals(40000, 2);
    const std::vector<double> b(ys.begin(), ys.begin() + 10000);
    const double ratio_cov = covariance_estimate(a, b).se / covariance_estimate(xs, ys).se;
    CHECK(ratio_cov >= 2.0 / 1.5);
    CHECK(ratio_cov <= 2.0 * 1.5);
  }

  TEST_CASE("covariance and correlation estimates") {
    const auto xs = normals(20000, 3);
    auto ys = normals(20000, 4);
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = 0.6 * xs[i] + 0.8 * ys[i];
    CHECK(within_band(covariance_estimate(xs, ys), 0.6));
    const auto c = correlation_estimate(xs, ys);
    CHECK(within_band(c, 0.6));
    CHECK(c.mean <= 1.0);
    CHECK(c.mean >= -1.0);
    const auto same = correlation_estimate(xs, xs);
    CHECK(same.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.se < 1e-6);
    CHECK_THROWS_AS(covariance_estimate(std::vector<double>(50, 1.0), std::vector<double>(50, 1.0)), ConfigError);
    CHECK_THROWS_AS(covariance_estimate(xs, std::vector<double>(10, 1.0)), ConfigError);
  }

  TEST_CASE("jackknife SE of a covariance matches the delta-method value") {
    // for independent standard normals Var(xy) = 1, so SE ~ 1/sqrt(N)
    const auto xs = normals(10000, 5), ys = normals(10000, 6);
    CHECK(covariance_estimate(xs, ys).se == doctest::Approx(0.01).epsilon(0.1));
  }

  TEST_CASE("ensemble covariance") {
    const auto g = small_grid();
    const auto ens = ensemble(g, 4000, 41);
    CHECK(within_band(covariance_estimate(ens, 0.5, 1.0), 0.5));
    CHECK(within_band(covariance_estimate(ens, 0.25, 0.25), 0.25));
  }

  TEST_CASE("bands and violation allowances") {
    CHECK(allowed_violations(8) == 1);
    CHECK(allowed_violations(10) == 1);
    CHECK(allowed_violations(20000) == 2);
    const auto b = band("x", McEstimate{1.0, 0.1, 100}, 1.39);
    CHECK(b.within);
    CHECK_FALSE(band("x", McEstimate{1.0, 0.1, 100}, 1.41).within);
    std::vector<Band> bs(10, b);
    bs[0].within = false;
    CHECK(summarize(bs).pass);
    bs[1].within = false;
    const auto s = summarize(bs);
    CHECK_FALSE(s.pass);
    CHECK(s.violations == 2);
  }

  TEST_CASE("Brownian covariance bands") {
    const auto g = small_grid();
    const auto ens = ensemble(g, 4000, 42);
    const std::vector<double> times{0.25, 0.5, 0.75, 1.0};
    std::vector<std::vector<double>> samples(ens.size());
    for (std::size_t p = 0; p < ens.size(); ++p)
      for (double t : times) samples[p].push_back(ens[p].at(t));
    const auto s = brownian_covariance_bands(samples, times);
    CHECK(s.bands.size() == 10);
    CHECK(s.pass);
    // scaled paths are not Brownian
    for (auto& row : samples)
      for (auto& v : row) v *= 1.2;
    CHECK_FALSE(brownian_covariance_bands(samples, times).pass);
  }

  TEST_CASE("independence surrogate and its negative control") {
    const auto g = small_grid();
    const auto ens = ensemble(g, 5000, 43);
    for (const auto& [basis, kernel] : {std::pair{FunctionBasis::constant(), GoursatKernel::constant()},
                                        std::pair{FunctionBasis::powers({0.0, 1.0}), GoursatKernel::muntz({0.0, 1.0})}}) {
      const auto r = independence_test(basis, kernel, ens, 1.0);
      CHECK(r.times == independence_times(1.0));
      CHECK(r.correlation.rows() == static_cast<Eigen::Index>(basis.size()));
      CHECK(r.pass);
      CHECK(r.correlation.cwiseAbs().maxCoeff() <= 1.0);
    }
    const auto control =
        independence_test(FunctionBasis::constant(), GoursatKernel::constant(), ens, 1.0, IndependenceTarget::raw);
    CHECK_FALSE(control.pass);
    CHECK(control.correlation(0, 7) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("sign-corrupted Muntz kernel fails the Brownian suite") {
    GridParams p = GridParams::defaults(1.0);
    p.delta = 2e-3;
    const auto g = TimeGrid::build(p);
    const std::vector<double> times{0.25, 0.5, 0.75, 1.0};
    const auto good = GoursatKernel::muntz({0.0, 1.0});
    const auto bad = GoursatKernel::muntz_unchecked({0.0, 1.0}, vec({2.0, -6.0}));
    const VolterraTransform tg(good, g), tb(bad, g);
    std::vector<std::vector<double>> sg(3000), sb(3000);
    for (std::size_t i = 0; i < sg.size(); ++i) {
      const auto b = sample_brownian(g, RngSpec{44}, i);
      const auto og = tg.apply(b).output, ob = tb.apply(b).output;
      for (double t : times) {
        sg[i].push_back(og.at(t));
        sb[i].push_back(ob.at(t));
      }
    }
    CHECK(brownian_covariance_bands(sg, times).pass);
    CHECK_FALSE(brownian_covariance_bands(sb, times).pass);
  }

  TEST_CASE("progressive decomposition") {
    GridParams p = GridParams::defaults(8.0);
    p.delta = 1.0 / 128.0;
    const auto g = TimeGrid::build(p);
    const auto basis = FunctionBasis::powers({0.0, 1.0});
    const auto ens = ensemble(g, 2000, 45);
    const auto r = progressive_decomposition_test(basis, GoursatKernel::muntz({0.0, 1.0}), ens, 1.0, 8.0, 0.1);
    CHECK(r.correlations.pass);
    CHECK(r.max_rms <= r.tolerance);
    CHECK(r.pass);
    CHECK_THROWS_AS(progressive_decomposition_test(basis, GoursatKernel::muntz({0.0, 1.0}), ens, 1.0, 4.0, 0.1),
                    ConfigError);
  }
}
