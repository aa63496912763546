#include "goursat/errors.h"
#include "goursat/harmonic.h"
#include "goursat/stats.h"
#include "goursat/transform.h"
#include "goursat/paths.h"

#include "helpers.h"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace goursat;
using goursat::test::vec;
using goursat::test::within_band;

TEST_SUITE("harmonic") {
  TEST_CASE("point masses") {
    const auto zero = EndpointLaw::point_mass(vec({0.0}));
    for (double t : {0.5, 2.0})
      for (double x : {-3.0, 0.0, 1.5}) CHECK(harmonic_h(FunctionBasis::constant(), zero, t, vec({x})) == 1.0);
    const auto law = EndpointLaw::point_mass(vec({0.8}));
    for (double t : {0.5, 2.0})
      for (double x : {-1.0, 0.3})
        CHECK(harmonic_h(FunctionBasis::constant(), law, t, vec({x})) ==
              doctest::Approx(std::exp(0.8 * x - 0.5 * 0.64 * t)).epsilon(1e-14));
  }

  TEST_CASE("Gaussian closed form") {
    const auto basis = FunctionBasis::powers({0.0, 1.0});
    const auto law = EndpointLaw::gaussian(vec({0.0, 0.0}), Matrix::Identity(2, 2));
    const Vector x = vec({0.3, 0.2});
    CHECK(std::abs(harmonic_h(basis, law, 1.0, x) - 0.662172572913577688250) < 1e-13);
    const auto mc = harmonic_h_over_law(basis, law, 1.0, x, 100000, RngSpec{31});
    CHECK(within_band(mc, harmonic_h(basis, law, 1.0, x)));
  }

  TEST_CASE("Gaussian closed form with a mean and a singular covariance") {
    const auto basis = FunctionBasis::powers({0.0, 1.0});
    Matrix c(2, 2);
    c << 0.5, 0.0, 0.0, 0.0;
    const auto law = EndpointLaw::gaussian(vec({0.2, -0.4}), c);
    const Vector x = vec({0.1, 0.3});
    const double h = harmonic_h(basis, law, 0.7, x);
    CHECK(std::isfinite(h));
    CHECK(within_band(harmonic_h_over_law(basis, law, 0.7, x, 100000, RngSpec{32}), h));
    // zero covariance collapses to the point mass at the mean
    const auto degenerate = EndpointLaw::gaussian(vec({0.2, -0.4}), Matrix::Zero(2, 2));
    CHECK(harmonic_h(basis, degenerate, 0.7, x) ==
          doctest::Approx(harmonic_h(basis, EndpointLaw::point_mass(vec({0.2, -0.4})), 0.7, x)).epsilon(1e-13));
  }

  TEST_CASE("discrete laws stay finite in log space") {
    const auto law = EndpointLaw::discrete({vec({1.0}), vec({-2.0})}, {0.25, 0.75});
    const Matrix m = Matrix::Constant(1, 1, 1.0);
    const double direct = 0.25 * std::exp(1.0 * 0.4 - 0.5) + 0.75 * std::exp(-2.0 * 0.4 - 2.0);
    CHECK(std::exp(log_harmonic_h(m, law, vec({0.4}))) == doctest::Approx(direct).epsilon(1e-14));
    const double big = log_harmonic_h(m, law, vec({1e4}));
    CHECK(std::isfinite(big));
    CHECK(big == doctest::Approx(std::log(0.25) + 1e4 - 0.5).epsilon(1e-12));
  }

  TEST_CASE("law validation") {
    CHECK_THROWS_AS(EndpointLaw::discrete({vec({1.0})}, {-1.0}), ConfigError);
    CHECK_THROWS_AS(EndpointLaw::discrete({vec({1.0}), vec({1.0, 2.0})}, {0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(EndpointLaw::discrete({}, {}), ConfigError);
    Matrix bad(2, 2);
    bad << 1.0, 3.0, 3.0, 1.0;
    CHECK_THROWS_AS(EndpointLaw::gaussian(vec({0.0, 0.0}), bad), ConfigError);
    CHECK_THROWS_AS(EndpointLaw::gaussian(vec({0.0}), Matrix::Identity(2, 2)), ConfigError);
    CHECK_THROWS_AS(EndpointLaw::discrete({vec({1.0}), vec({2.0})}, {1.0, 3.0}), ConfigError);
    CHECK_NOTHROW(EndpointLaw::discrete({vec({1.0}), vec({2.0})}, {0.25, 0.75}));
  }

  TEST_CASE("law spec strings") {
    const auto p = parse_law("point:0.5,-1");
    CHECK(p.dim() == 2);
    CHECK(p.points.at(0)(1) == -1.0);
    const auto dir = std::filesystem::temp_directory_path() / "goursat_law_test";
    std::filesystem::create_directories(dir);
    {
      std::ofstream d(dir / "d.txt");
      d << "# weight y\n0.25 0.5\n0.75 -1.5\n";
      std::ofstream g(dir / "g.txt");
      g << "1 0\n0 2\nmean 0.1 0.2\n";
    }
    const auto d = parse_law("discrete:d.txt", dir.string());
    CHECK(d.kind == EndpointLaw::Kind::discrete);
    CHECK(d.weights.at(1) == doctest::Approx(0.75));
    const auto g = parse_law("gauss:g.txt", dir.string());
    CHECK(g.kind == EndpointLaw::Kind::gaussian);
    CHECK(g.cov(1, 1) == 2.0);
    CHECK(g.mean(1) == 0.2);
    CHECK_THROWS_AS(parse_law("poisson:1"), ConfigError);
    CHECK_THROWS_AS(parse_law("point:"), ConfigError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("martingale check") {
    const auto zero = martingale_check(FunctionBasis::constant(), EndpointLaw::point_mass(vec({0.0})), 1.0, 200, RngSpec{33});
    CHECK(zero.mean == 1.0);
    CHECK(zero.se == 0.0);
    GridParams p = GridParams::defaults(1.0);
    p.delta = 2e-3;
    const auto e = martingale_check(FunctionBasis::constant(), EndpointLaw::point_mass(vec({0.5})), 1.0, 5000, RngSpec{34}, p);
    CHECK(within_band(e, 1.0));
    CHECK_THROWS_AS(martingale_check(FunctionBasis({BasisFunction::exponential(1.0)}),
                                     EndpointLaw::point_mass(vec({0.5})), 1.0, 10, RngSpec{1}),
                    ConfigError);
    CHECK_THROWS_AS(martingale_check(FunctionBasis::constant(), EndpointLaw::point_mass(vec({0.5, 1.0})), 1.0, 10,
                                     RngSpec{1}),
                    ConfigError);
  }

  TEST_CASE("tower check at two times") {
    const auto basis = FunctionBasis::powers({0.0, 1.0});
    const auto law = EndpointLaw::discrete({vec({0.3, -0.2}), vec({-0.5, 0.4})}, {0.5, 0.5});
    GridParams ps = GridParams::defaults(0.5), pt = GridParams::defaults(1.0);
    ps.delta = pt.delta = 2e-3;
    const auto s = martingale_check(basis, law, 0.5, 5000, RngSpec{35}, ps);
    const auto t = martingale_check(basis, law, 1.0, 5000, RngSpec{36}, pt);
    CHECK(std::abs(s.mean - t.mean) <= 4.0 * std::hypot(s.se, t.se));
    CHECK(within_band(s, 1.0));
    CHECK(within_band(t, 1.0));
  }

  TEST_CASE("tilted sampler") {
    GridParams p = GridParams::defaults(1.0);
    p.delta = 2e-3;
    const auto g = TimeGrid::build(p);
    const auto plain = tilted_sampler(FunctionBasis::constant(), EndpointLaw::point_mass(vec({0.0})), g, RngSpec{37}, 4);
    CHECK(plain.path.values == sample_brownian(g, RngSpec{37}, 4).values);

    const TiltedSampler s(FunctionBasis::constant(), EndpointLaw::point_mass(vec({2.0})), g);
    const VolterraTransform tr(GoursatKernel::constant(), g);
    const YRecovery rec(FunctionBasis::constant(), g, 1.0);
    const std::size_t n = 4000;
    std::vector<double> x1(n), sig(n), sigh(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto tp = s.sample(RngSpec{38}, i);
      CHECK(tp.y(0) == 2.0);
      x1[i] = tp.path.values.back();
      y[i] = rec.apply(tp.path).value(0);
      const auto out = tr.apply(tp.path).output;
      sig[i] = out.values.back();
      sigh[i] = out.at(0.5);
    }
    CHECK(within_band(mean_estimate(x1), 2.0));
    CHECK(within_band(mean_estimate(y), 2.0));
    CHECK(within_band(mean_estimate(sig), 0.0));
    CHECK(within_band(covariance_estimate(sig, sig), 1.0));
    CHECK(within_band(covariance_estimate(sigh, sig), 0.5));
  }

  TEST_CASE("tilted sampler with a Gaussian law") {
    GridParams p = GridParams::defaults(1.0);
    p.delta = 5e-3;
    const auto g = TimeGrid::build(p);
    const auto basis = FunctionBasis::powers({0.0, 1.0});
    const TiltedSampler s(basis, EndpointLaw::gaussian(vec({1.0, -2.0}), Matrix::Identity(2, 2) * 0.1), g);
    const YRecovery rec(basis, g, 1.0);
    const std::size_t n = 4000;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rec.apply(s.sample(RngSpec{39}, i).path).value;
      a[i] = r(0);
      b[i] = r(1);
    }
    CHECK(within_band(mean_estimate(a), 1.0));
    CHECK(within_band(mean_estimate(b), -2.0));
  }
}
