#include "goursat/errors.h"
#include "goursat/stats.h"
#include "goursat/transform.h"

#include "helpers.h"

#include <cmath>
#include <random>

using namespace goursat;
using goursat::test::within_band;

namespace {

GridPtr unit_grid(double delta = 5e-4, double eps0 = 1e-4) {
  GridParams p = GridParams::defaults(1.0);
  p.delta = delta;
  p.eps0 = eps0;
  return TimeGrid::build(p);
}

SamplePath deterministic(const GridPtr& g, const std::function<double(double)>& x) {
  SamplePath p{g, std::vector<double>(g->size()), PathRole::brownian};
  for (std::size_t i = 0; i < g->size(); ++i) p.values[i] = x((*g)[i]);
  return p;
}

double sup_abs(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

double laguerre_poly(unsigned n, double x) {
  switch (n) {
    case 0: return 1.0;
    case 1: return 1.0 - x;
    case 2: return (x * x - 4.0 * x + 2.0) / 2.0;
    case 3: return (-x * x * x + 9.0 * x * x - 18.0 * x + 6.0) / 6.0;
    default: return (x * x * x * x - 16.0 * x * x * x + 72.0 * x * x - 96.0 * x + 24.0) / 24.0;
  }
}

}  // namespace

TEST_SUITE("transform") {
  TEST_CASE("phi on nodes matches the basis module") {
    const std::vector<double> t{0.1, 0.5, 1.0, 3.0};
    const auto g = GoursatKernel::generic(FunctionBasis({BasisFunction::exponential(1.0), BasisFunction::constant()}));
    const Matrix p = phi_on_nodes(g, t);
    for (std::size_t k = 0; k < t.size(); ++k)
      CHECK((p.col(static_cast<Eigen::Index>(k)) - phi(g.basis(), t[k])).cwiseAbs().maxCoeff() <= 1e-9 * phi(g.basis(), t[k]).cwiseAbs().maxCoeff());
  }

  TEST_CASE("reproduced functions are annihilated") {
    const auto g = unit_grid();
    const auto c = volterra_transform(GoursatKernel::constant(), deterministic(g, [](double t) { return t; }));
    for (double v : c.output.values) CHECK(std::abs(v) <= 2e-4);

    std::mt19937_64 gen(3);
    std::normal_distribution<double> z;
    const auto k = GoursatKernel::muntz({0.0, 1.0});
    for (int rep = 0; rep < 5; ++rep) {
      const double c1 = z(gen), c2 = z(gen);
      const auto r = volterra_transform(k, deterministic(g, [&](double t) { return c1 * t + c2 * t * t / 2.0; }));
      for (double v : r.output.values) CHECK(std::abs(v) <= 1e-3 * (std::abs(c1) + std::abs(c2)));
    }
    const auto e = GoursatKernel::generic(FunctionBasis({BasisFunction::exponential(1.0)}));
    const auto r = volterra_transform(e, deterministic(g, [](double t) { return 1.0 - std::exp(-t); }));
    for (double v : r.output.values) CHECK(std::abs(v) <= 1e-3);
  }

  TEST_CASE("transform reports") {
    const auto g = unit_grid();
    const auto b = sample_brownian(g, RngSpec{4}, 0);
    const auto r = volterra_transform(GoursatKernel::constant(), b);
    CHECK(r.output.role == PathRole::transformed);
    CHECK(r.eps0 == g->eps0());
    CHECK(r.eps0_contribution == doctest::Approx(b.values[0] / g->eps0() * (2.0 / 3.0) * g->eps0()));
    CHECK(r.convergence_estimate >= 0.0);
    CHECK(r.convergence_estimate < 0.05);
    CHECK(r.output.values[0] == b.values[0]);
  }

  TEST_CASE("transformed Brownian motion has Brownian variance") {
    GridParams p = GridParams::defaults(1.0);
    p.delta = 2e-3;
    const auto g = TimeGrid::build(p);
    for (const auto& k : {GoursatKernel::constant(), GoursatKernel::muntz({0.0, 1.0})}) {
      const VolterraTransform tr(k, g);
      const std::size_t n = 4000;
      std::vector<double> a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto out = tr.apply(sample_brownian(g, RngSpec{8}, i)).output;
        a[i] = out.at(0.5);
        b[i] = out.values.back();
      }
      CHECK(within_band(covariance_estimate(a, b), 0.5));
      CHECK(within_band(covariance_estimate(b, b), 1.0));
    }
  }

  TEST_CASE("transform rejects foreign grids and non-finite drift") {
    const auto g = unit_grid();
    const VolterraTransform tr(GoursatKernel::constant(), g);
    CHECK_THROWS_AS(tr.apply(sample_brownian(unit_grid(1e-3), RngSpec{1}, 0)), ConfigError);
  }

  TEST_CASE("iterate_transform basics") {
    const auto g = unit_grid();
    const auto b = sample_brownian(g, RngSpec{5}, 0);
    const auto k = GoursatKernel::muntz({0.0, 1.0});
    CHECK(iterate_transform(k, b, 0).values == b.values);
    CHECK(iterate_transform(k, b, 1).values == volterra_transform(k, b).output.values);
  }

  TEST_CASE("Laguerre recurrence") {
    for (unsigned n = 0; n <= 4; ++n)
      for (double x : {0.0, 0.3, 1.7, 9.2}) CHECK(laguerre(n, x) == doctest::Approx(laguerre_poly(n, x)).epsilon(1e-12));
  }

  TEST_CASE("Laguerre sums against the iterated transform") {
    const auto g = unit_grid();
    const auto b = sample_brownian(g, RngSpec{6}, 0);
    CHECK(laguerre_direct(0, b).values == b.values);
    const auto k = GoursatKernel::constant();
    // one pass agrees exactly: the log-trapezoid is the log-midpoint sum by parts
    CHECK(sup_abs(laguerre_direct(1, b).values, volterra_transform(k, b).output.values) < 1e-12);
    for (unsigned m = 2; m <= 3; ++m) CHECK(sup_abs(laguerre_direct(m, b).values, iterate_transform(k, b, m).values) <= 1e-2);
  }

  TEST_CASE("Laguerre gap shrinks under refinement") {
    const auto k = GoursatKernel::constant();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const RngSpec rng{seed};
      const auto b = sample_brownian(unit_grid(), rng, 0);
      const auto f = refine_path(b, rng, 0, 1, true);
      const double coarse = sup_abs(laguerre_direct(2, b).values, iterate_transform(k, b, 2).values);
      const double fine = sup_abs(laguerre_direct(2, f).values, iterate_transform(k, f, 2).values);
      CHECK(coarse / fine >= 1.5);
    }
  }

  TEST_CASE("refinement convergence") {
    const auto k = GoursatKernel::muntz({0.0, 1.0});
    auto x = [](double t) { return std::sqrt(t) + std::sin(3.0 * t); };
    auto successive_ratios = [&](bool keep_origin) {
      auto g = unit_grid(0.02, 1e-3);
      std::vector<double> at_one;
      for (int level = 0; level < 5; ++level) {
        at_one.push_back(volterra_transform(k, deterministic(g, x)).output.values.back());
        g = g->refined(keep_origin);
      }
      std::vector<double> r;
      for (std::size_t i = 0; i + 2 < at_one.size(); ++i)
        r.push_back((at_one[i] - at_one[i + 1]) / (at_one[i + 1] - at_one[i + 2]));
      return r;
    };
    // eps0 fixed: second order in delta
    for (double r : successive_ratios(true)) {
      CAPTURE(r);
      CHECK(r == doctest::Approx(4.0).epsilon(0.05));
    }
    // eps0 halved too: the omitted piece on (0, eps0) is O(sqrt(eps0)) for a sqrt(t) path
    for (double r : successive_ratios(false)) {
      CAPTURE(r);
      CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
    }
  }

  TEST_CASE("x_zero preconditions") {
    auto p = GridParams::defaults(1.0);
    p.tail_end = 5.0;
    const auto short_grid = TimeGrid::build(p);
    const auto e = GoursatKernel::generic(FunctionBasis({BasisFunction::exponential(1.0)}));
    CHECK_THROWS_AS(XZero(e, short_grid, 1.0), ConfigError);
    p.tail_end = 20.0;
    CHECK_THROWS_AS(XZero(GoursatKernel::muntz({0.0, 1.0}), TimeGrid::build(p), 1.0), TruncationError);
    try {
      XZero(GoursatKernel::muntz({0.0, 1.0}), TimeGrid::build(p), 1.0);
    } catch (const TruncationError& err) {
      CHECK(err.bound() > 1e-4);
    }
  }

  TEST_CASE("x_zero of the zero path is zero") {
    auto p = GridParams::defaults(1.0);
    p.tail_end = 40.0;
    const auto g = TimeGrid::build(p);
    const auto e = GoursatKernel::generic(FunctionBasis({BasisFunction::exponential(1.0)}));
    const auto r = x_zero(e, SamplePath{g, std::vector<double>(g->size(), 0.0), PathRole::brownian}, 1.0);
    for (double v : r.path.values) CHECK(v == 0.0);
    CHECK(r.path.grid->end() == doctest::Approx(1.0));
    CHECK(r.t_max >= 40.0);
    CHECK(r.truncation_bound < 1e-4);
  }

  TEST_CASE("x_zero solves the singular equation") {
    auto p = GridParams::defaults(2.0);
    p.tail_end = 40.0;
    const auto g = TimeGrid::build(p);
    const auto e = GoursatKernel::generic(FunctionBasis({BasisFunction::exponential(1.0)}));
    for (std::uint64_t i = 0; i < 3; ++i) {
      const auto w = sample_brownian(g, RngSpec{12}, i);
      const auto x0 = x_zero(e, w, 2.0);
      const auto back = volterra_transform(e, x0.path).output;
      // the transform leaves out its own drift on (0, eps0), an O(sqrt(eps0)) constant
      const double offset = back.values[0] - w.values[0];
      CHECK(std::abs(offset) <= std::sqrt(g->eps0()));
      for (std::size_t k = 0; k < back.values.size(); ++k)
        CHECK(std::abs(back.values[k] - w.values[k] - offset) <= 2e-3);
    }
  }

  TEST_CASE("x_zero variance") {
    auto p = GridParams::defaults(1.0);
    p.delta = 2e-3;
    p.tail_end = 40.0;
    const auto g = TimeGrid::build(p);
    const XZero ex(GoursatKernel::generic(FunctionBasis({BasisFunction::exponential(1.0)})), g, 1.0);
    const std::size_t n = 6000;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = ex.apply(sample_brownian(g, RngSpec{13}, i)).path.values.back();
    CHECK(within_band(covariance_estimate(v, v), 0.200847198212543902594));

    auto q = GridParams::defaults(1.0);
    q.delta = 2e-3;
    q.tail_end = 1e5;
    const auto gm = TimeGrid::build(q);
    const XZero mu(GoursatKernel::muntz({0.0, 1.0}), gm, 1.0);
    std::vector<double> u(n / 2);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = mu.apply(sample_brownian(gm, RngSpec{14}, i)).path.values.back();
    CHECK(within_band(covariance_estimate(u, u), 1.0));
  }

  TEST_CASE("recover_y") {
    auto p = GridParams::defaults(4.0);
    p.delta = 4e-3;
    const auto g = TimeGrid::build(p);
    const YRecovery rec(FunctionBasis::constant(), g, 4.0);
    const std::size_t n = 2000;
    std::vector<double> drifted(n), plain(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto b = sample_brownian(g, RngSpec{15}, i);
      plain[i] = rec.apply(b).value(0);
      for (std::size_t k = 0; k < g->size(); ++k) b.values[k] += 3.0 * (*g)[k];
      const auto r = rec.apply(b);
      drifted[i] = r.value(0);
      if (i == 0) {
        CHECK(r.at_half.has_value());
        CHECK(r.at_quarter.has_value());
        CHECK(r.horizon == 4.0);
        CHECK(r.value(0) == doctest::Approx(b.values.back() / 4.0).epsilon(1e-12));
      }
    }
    CHECK(within_band(mean_estimate(drifted), 3.0));
    CHECK(within_band(mean_estimate(plain), 0.0));
    CHECK(mean_estimate(plain).se == doctest::Approx(0.5 / std::sqrt(static_cast<double>(n))).epsilon(0.1));
  }
}
