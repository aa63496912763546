#include "goursat/basis.h"
#include "goursat/errors.h"
#include "goursat/quadrature.h"

#include "helpers.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace goursat;
using goursat::test::mat2;
using goursat::test::max_abs_diff;

namespace {

std::vector<std::pair<std::string, FunctionBasis>> sample_bases() {
  return {{"const", FunctionBasis::constant()},
          {"powers 0,1", FunctionBasis::powers({0.0, 1.0})},
          {"powers 0,1,2", FunctionBasis::powers({0.0, 1.0, 2.0})},
          {"powers -0.3,0.5", FunctionBasis::powers({-0.3, 0.5})},
          {"exp 1", FunctionBasis({BasisFunction::exponential(1.0)})},
          {"exp 1, const", FunctionBasis({BasisFunction::exponential(1.0), BasisFunction::constant()})},
          {"exp 1, exp 2", FunctionBasis({BasisFunction::exponential(1.0), BasisFunction::exponential(2.0)})},
          {"power 0.5, exp 2", FunctionBasis({BasisFunction::power(0.5), BasisFunction::exponential(2.0)})}};
}

}  // namespace

TEST_SUITE("basis") {
  TEST_CASE("gramian examples") {
    CHECK(gramian(FunctionBasis::constant(), 2.0)(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(max_abs_diff(gramian(FunctionBasis::powers({0.0, 1.0}), 1.0), mat2(1.0, 0.5, 0.5, 1.0 / 3.0)) < 1e-15);
    const FunctionBasis e({BasisFunction::exponential(1.0)});
    CHECK(std::abs(gramian(e, 20.0)(0, 0) - 0.4999999999999999978758) < 1e-16);
    CHECK(gramian(e, std::numeric_limits<double>::infinity())(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("gramian closed forms agree with quadrature") {
    const FunctionBasis b({BasisFunction::power(0.5), BasisFunction::exponential(2.0), BasisFunction::constant()});
    const Matrix g = gramian(b, 1.7);
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) {
        QuadratureOptions opt;
        opt.lower_singularity = b[i].exponent_at_zero() + b[j].exponent_at_zero();
        const double q = quad([&](double s) { return b[i](s) * b[j](s); }, 0.0, 1.7, opt);
        CHECK(std::abs(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - q) < 1e-12);
      }
  }

  TEST_CASE("gramian rejects non-positive t") {
    CHECK_THROWS_AS(gramian(FunctionBasis::constant(), 0.0), ConfigError);
    CHECK_THROWS_AS(gramian(FunctionBasis::constant(), -1.0), ConfigError);
  }

  TEST_CASE("alpha examples") {
    CHECK(alpha(FunctionBasis::constant(), 2.0)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    const auto p = FunctionBasis::powers({0.0, 1.0});
    const Matrix a1 = alpha(p, 1.0);
    CHECK(max_abs_diff(a1, mat2(4.0, -6.0, -6.0, 12.0)) < 1e-12);
    // entries scale as t^{-lambda_i - lambda_j - 1}
    const Matrix a2 = alpha(p, 2.0);
    const double lam[2] = {0.0, 1.0};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(std::abs(a2(i, j) - a1(i, j) * std::pow(2.0, -lam[i] - lam[j] - 1.0)) < 1e-12);
  }

  TEST_CASE("phi examples") {
    for (double t : {0.3, 1.0, 7.0}) CHECK(phi(FunctionBasis::constant(), t)(0) == doctest::Approx(1.0 / t).epsilon(1e-14));
    const Vector p = phi(FunctionBasis::powers({0.0, 1.0}), 1.0);
    CHECK(std::abs(p(0) + 2.0) < 1e-12);
    CHECK(std::abs(p(1) - 6.0) < 1e-12);
    const FunctionBasis e({BasisFunction::exponential(1.0)});
    CHECK(phi(e, 0.5)(0) == doctest::Approx(1.91903475133494371949).epsilon(1e-13));
    CHECK(phi(e, 1.0)(0) == doctest::Approx(0.850918128239321545).epsilon(1e-13));
    CHECK(phi(e, 2.0)(0) == doctest::Approx(0.275720564771783208).epsilon(1e-13));
  }

  TEST_CASE("gramian state bundles consistent pieces") {
    const auto b = FunctionBasis::powers({0.0, 1.0});
    const auto s = gramian_state(b, 1.5);
    CHECK(s.t == 1.5);
    CHECK(max_abs_diff(s.m * s.alpha, Matrix::Identity(2, 2)) < 1e-12);
    CHECK(max_abs_diff(s.phi, s.alpha * b.values(1.5)) < 1e-12);
  }

  TEST_CASE("inverse, symmetry and diagonal invariants") {
    for (const auto& [name, b] : sample_bases()) {
      CAPTURE(name);
      for (double t : {0.5, 1.0, 2.0}) {
        CAPTURE(t);
        const Matrix m = gramian(b, t);
        const Matrix a = alpha(b, t);
        const auto n = static_cast<Eigen::Index>(b.size());
        CHECK((m * a - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff()));
        CHECK(max_abs_diff(a, a.transpose()) <= 1e-12 * a.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < n; ++i) {
          CHECK(m(i, i) > 0.0);
          CHECK(a(i, i) > 0.0);
          CHECK(a(i, i) >= (1.0 - 1e-12) / m(i, i));
        }
      }
    }
  }

  TEST_CASE("d alpha / dt = -phi phi^* and the diagonal decreases") {
    const double h = 1e-5;
    for (const auto& [name, b] : sample_bases()) {
      CAPTURE(name);
      for (double t : {0.5, 1.0, 2.0}) {
        const Matrix d = (alpha(b, t + h) - alpha(b, t - h)) / (2.0 * h);
        const Vector p = phi(b, t);
        const Matrix target = -p * p.transpose();
        CHECK(max_abs_diff(d, target) <= 1e-5 * target.cwiseAbs().maxCoeff());
        const Matrix later = alpha(b, t * 1.1);
        const Matrix now = alpha(b, t);
        for (Eigen::Index i = 0; i < now.rows(); ++i) CHECK(later(i, i) < now(i, i));
      }
    }
  }

  TEST_CASE("ill-conditioned gramian names the time") {
    const auto b = FunctionBasis::powers({0.0, 1e-7});
    try {
      alpha(b, 3.0);
      FAIL("expected IllConditionedError");
    } catch (const IllConditionedError& e) {
      CHECK(e.time() == 3.0);
      CHECK(e.condition() > kConditionLimit);
    }
  }

  TEST_CASE("alpha_infinity examples") {
    const auto zero = alpha_infinity(FunctionBasis::powers({0.0, 1.0}));
    CHECK(zero.value.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zero.zero_rows == std::vector<bool>{true, true});

    const auto e = alpha_infinity(FunctionBasis({BasisFunction::exponential(1.0)}));
    CHECK(std::abs(e.value(0, 0) - 2.0) < 1e-12);
    CHECK(e.zero_rows == std::vector<bool>{false});

    const auto mixed = alpha_infinity(FunctionBasis({BasisFunction::exponential(1.0), BasisFunction::constant()}));
    CHECK(max_abs_diff(mixed.value, mat2(2.0, 0.0, 0.0, 0.0)) < 1e-6);
    CHECK(mixed.zero_rows == std::vector<bool>{false, true});
    CHECK(mixed.value(1, 0) == 0.0);
    CHECK(mixed.value(0, 1) == 0.0);
    CHECK(mixed.value(1, 1) == 0.0);
  }

  TEST_CASE("alpha_infinity structure across the norm cases") {
    const std::vector<FunctionBasis> bases{
        FunctionBasis({BasisFunction::exponential(1.0), BasisFunction::exponential(2.0)}),
        FunctionBasis({BasisFunction::exponential(1.0), BasisFunction::constant()}),
        FunctionBasis({BasisFunction::power(0.5), BasisFunction::exponential(3.0)}),
        FunctionBasis::powers({0.0, 1.0})};
    for (const auto& b : bases) {
      CAPTURE(b.describe());
      const auto a = alpha_infinity(b);
      const auto n = a.value.rows();
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool divergent = !b[static_cast<std::size_t>(i)].squared_norm().finite;
        CHECK(a.zero_rows[static_cast<std::size_t>(i)] == divergent);
        if (divergent) {
          CHECK(a.value.row(i).cwiseAbs().maxCoeff() == 0.0);
          CHECK(a.value.col(i).cwiseAbs().maxCoeff() == 0.0);
        } else {
          CHECK(a.value(i, i) > 0.0);
        }
        for (Eigen::Index j = 0; j < n; ++j)
          CHECK(a.value(i, j) * a.value(i, j) <= a.value(i, i) * a.value(j, j) * (1.0 + 1e-9) + 1e-15);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(a.value);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }
  }

  TEST_CASE("both-finite alpha_infinity inverts the full gramian") {
    const FunctionBasis b({BasisFunction::exponential(1.0), BasisFunction::exponential(2.0)});
    const Matrix inv = gramian(b, std::numeric_limits<double>::infinity()).inverse();
    CHECK(max_abs_diff(alpha_infinity(b).value, inv) < 1e-9);
  }

  TEST_CASE("orthonormal system examples") {
    for (double t : {0.5, 2.0}) {
      const auto q = orthonormalize(FunctionBasis::constant(), t);
      CHECK(q.b(0, 0) == doctest::Approx(1.0 / std::sqrt(t)).epsilon(1e-14));
      CHECK(q(0.1)(0) == doctest::Approx(1.0 / std::sqrt(t)).epsilon(1e-14));
    }
    const auto q = orthonormalize(FunctionBasis::powers({0.0, 1.0}), 1.0);
    for (double u : {0.0, 0.25, 0.6, 1.0}) {
      CHECK(std::abs(q(u)(0) - 1.0) < 1e-12);
      CHECK(std::abs(q(u)(1) - std::sqrt(3.0) * (2.0 * u - 1.0)) < 1e-12);
    }
  }

  TEST_CASE("orthonormal system invariants") {
    for (const auto& b : {FunctionBasis::powers({0.0, 1.0, 2.0, 3.0}), FunctionBasis::powers({-0.3, 0.5}),
                          FunctionBasis({BasisFunction::exponential(1.0), BasisFunction::constant(),
                                         BasisFunction::power(2.0)})}) {
      CAPTURE(b.describe());
      const double t = 1.3;
      const auto q = orthonormalize(b, t);
      const auto n = static_cast<Eigen::Index>(b.size());
      for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(q.b(i, i) > 0.0);
        for (Eigen::Index j = 0; j < i; ++j) CHECK(q.b(i, j) == 0.0);
      }
      const Matrix a = alpha(b, t);
      CHECK(max_abs_diff(q.b * q.b.transpose(), a) <= 1e-8 * a.cwiseAbs().maxCoeff());
      QuadratureOptions opt;
      opt.abs_tol = 1e-13;
      opt.lower_singularity = 2.0 * std::min(0.0, b[0].exponent_at_zero());
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
          const double ip = quad([&](double u) { const Vector v = q(u); return v(i) * v(j); }, 0.0, t, opt);
          CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-8);
        }
    }
  }

  TEST_CASE("phi_i^2 = -2 (b_t' b_t^*)_ii") {
    const auto b = FunctionBasis::powers({0.0, 1.0, 2.0});
    const double t = 1.0, h = 1e-5;
    const Matrix db = (orthonormalize(b, t + h).b - orthonormalize(b, t - h).b) / (2.0 * h);
    const Matrix prod = db * orthonormalize(b, t).b.transpose();
    const Vector p = phi(b, t);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(p(i) * p(i) + 2.0 * prod(i, i)) <= 1e-5 * p(i) * p(i));
  }

  TEST_CASE("alpha identity examples") {
    const auto p = FunctionBasis::powers({0.0, 1.0});
    const auto tail = phi_tail(p, 1.0);
    CHECK(tail.method == PhiTail::Method::power_closed_form);
    CHECK(max_abs_diff(tail.value, mat2(4.0, -6.0, -6.0, 12.0)) < 1e-12);
    for (double t : {0.5, 1.0, 2.0}) {
      CHECK(verify_alpha_identity(p, t, 50.0).max_abs <= 1e-6);
      CHECK(verify_alpha_identity(FunctionBasis({BasisFunction::exponential(1.0)}), t, 30.0).max_abs <= 1e-8);
    }
    CHECK(phi_tail(FunctionBasis({BasisFunction::exponential(1.0)}), 5.0).method ==
          PhiTail::Method::exponential_closed_form);
  }

  TEST_CASE("alpha identity for mixed bases with quadrature tails") {
    const FunctionBasis b({BasisFunction::exponential(1.0), BasisFunction::constant()});
    for (double t : {0.5, 1.0, 2.0}) CHECK(verify_alpha_identity(b, t, 40.0).max_abs <= 1e-6);
  }

  TEST_CASE("function kinds and norm descriptors") {
    CHECK_FALSE(BasisFunction::constant().squared_norm().finite);
    CHECK_FALSE(BasisFunction::power(1.5).squared_norm().finite);
    const auto e = BasisFunction::exponential(4.0).squared_norm();
    CHECK(e.finite);
    CHECK(e.value == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
    CHECK_THROWS_AS(BasisFunction::power(-0.5), ConfigError);
    CHECK_THROWS_AS(BasisFunction::exponential(0.0), ConfigError);
    CHECK(BasisFunction::power(-0.25)(1e-300) > 0.0);
    CHECK(std::isfinite(BasisFunction::power(-0.25)(1e-300)));
  }

  TEST_CASE("tabulated functions interpolate monotonically") {
    std::vector<double> t, v;
    for (int i = 1; i <= 400; ++i) {
      t.push_back(0.01 * i);
      v.push_back(std::exp(-0.01 * i));
    }
    const auto f = BasisFunction::tabulated(t, v);
    CHECK(f.kind() == BasisKind::tabulated);
    CHECK(std::abs(f(1.234) - std::exp(-1.234)) < 1e-6);
    CHECK(f(0.001) == doctest::Approx(std::exp(-0.01)));
    CHECK(f(10.0) == doctest::Approx(std::exp(-4.0)));
    const FunctionBasis b({f, BasisFunction::constant()});
    const FunctionBasis ref({BasisFunction::exponential(1.0), BasisFunction::constant()});
    CHECK(max_abs_diff(gramian(b, 2.0), gramian(ref, 2.0)) < 1e-4);
    CHECK_THROWS_AS(BasisFunction::tabulated({1.0, 0.5}, {1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(BasisFunction::tabulated({1.0, 2.0}, {1.0}), ConfigError);
  }

  TEST_CASE("basis text format") {
    const auto b = parse_basis("# a comment\npower lambda=0.5\n\nexp rate=2\nconst\n");
    REQUIRE(b.size() == 3);
    CHECK(b[0].kind() == BasisKind::power);
    CHECK(b[0].parameter() == 0.5);
    CHECK(b[1].kind() == BasisKind::exponential);
    CHECK(b[1].parameter() == 2.0);
    CHECK(b[2].kind() == BasisKind::constant);
    CHECK(FunctionBasis::powers({0.0, 2.0})[0].kind() == BasisKind::constant);
    CHECK_THROWS_AS(parse_basis("power lambda=-0.6"), ConfigError);
    CHECK_THROWS_AS(parse_basis("bogus"), ConfigError);
    CHECK_THROWS_AS(parse_basis("exp"), ConfigError);
    CHECK_THROWS_AS(parse_basis(""), ConfigError);
  }

  TEST_CASE("table files resolve against the base directory") {
    const auto dir = std::filesystem::temp_directory_path() / "goursat_basis_test";
    std::filesystem::create_directories(dir);
    {
      std::ofstream out(dir / "f.txt");
      for (int i = 1; i <= 50; ++i) out << 0.1 * i << ", " << 2.0 * 0.1 * i << "\n";
    }
    const auto b = parse_basis("table file=f.txt", dir.string());
    REQUIRE(b.size() == 1);
    CHECK(b[0](2.5) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK_THROWS(parse_basis("table file=missing.txt", dir.string()));
    std::filesystem::remove_all(dir);
  }
}
