#include "goursat/basis.h"

#include "goursat/errors.h"
#include "goursat/quadrature.h"

#include <cmath>
// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace goursat {

// Monotone cubic (PCHIP) interpolant with constant extension outside the knots.
class MonotoneTable {
 public:
  MonotoneTable(std::vector<double> times, std::vector<double> values)
      : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size() || times_.size() < 2)
      throw ConfigError("tabulated basis function needs at least two (time, value) rows");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!std::isfinite(times_[i]) || !std::isfinite(values_[i]))
        throw ConfigError("tabulated basis function has non-finite entries");
      if (i == 0 ? !(times_[0] > 0.0) : !(times_[i] > times_[i - 1]))
        throw ConfigError("tabulated times must be positive and strictly increasing");
    }
    if (times_.size() >= 4) {
      auto x = times_;
      auto y = values_;
      spline_ = std::make_shared<Spline>(std::move(x), std::move(y));
    }
  }

  double operator()(double t) const {
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    if (spline_) return (*spline_)(t);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times_.begin());
    const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
    return (1.0 - w) * values_[k - 1] + w * values_[k];
  }

  const std::vector<double>& times() const { return times_; }
  double last_value() const { return values_.back(); }

 private:
  using Spline = boost::math::interpolators::pchip<std::vector<double>>;
  std::vector<double> times_;
  std::vector<double> values_;
  std::shared_ptr<Spline> spline_;
};

// --- BasisFunction ----------------------------------------------------------

BasisFunction BasisFunction::constant() { return BasisFunction(BasisKind::constant, 0.0); }

BasisFunction BasisFunction::power(double lambda) {
  if (!(lambda > -0.5) || !std::isfinite(lambda))
    throw ConfigError("power basis function needs lambda > -1/2");
  if (lambda == 0.0) return constant();
  return BasisFunction(BasisKind::power, lambda);
}

BasisFunction BasisFunction::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw ConfigError("exponential basis function needs rate > 0");
  return BasisFunction(BasisKind::exponential, rate);
}

BasisFunction BasisFunction::tabulated(std::vector<double> times, std::vector<double> values) {
  BasisFunction f(BasisKind::tabulated, 0.0);
  f.table_ = std::make_shared<const MonotoneTable>(std::move(times), std::move(values));
  return f;
}

BasisFunction BasisFunction::custom(CustomFunction fn) {
  if (!fn.value) throw ConfigError("custom basis function needs an evaluation handle");
  BasisFunction f(BasisKind::custom, 0.0);
  f.custom_ = std::make_shared<const CustomFunction>(std::move(fn));
  return f;
}

BasisFunction BasisFunction::inverse_exponential() {
  CustomFunction fn;
  fn.name = "inverse-exp";
  fn.value = [](double t) { return std::exp(-1.0 / t) / t; };
  fn.log_abs = [](double t) { return -1.0 / t - std::log(t); };
  // d/dt exp(-2/t) = 2 t^{-2} exp(-2/t)
  fn.cumulative_square = [](double t) { return 0.5 * std::exp(-2.0 / t); };
  fn.log_cumulative_square = [](double t) { return -2.0 / t - std::log(2.0); };
  fn.norm = {true, 0.5};
  fn.exponent_at_zero = 0.0;
  return custom(std::move(fn));
}

double BasisFunction::exponent_at_zero() const {
  switch (kind_) {
    case BasisKind::power: return param_;
    case BasisKind::custom: return custom_->exponent_at_zero;
    default: return 0.0;
  }
}

double BasisFunction::operator()(double t) const {
  switch (kind_) {
    case BasisKind::constant: return 1.0;
    case BasisKind::power: return std::pow(t, param_);
    case BasisKind::exponential: return std::exp(-param_ * t);
    case BasisKind::tabulated: return (*table_)(t);
    case BasisKind::custom: return custom_->value(t);
  }
  return 0.0;
}

double BasisFunction::log_abs(double t) const {
  switch (kind_) {
    case BasisKind::constant: return 0.0;
    case BasisKind::power: return param_ * std::log(t);
    case BasisKind::exponential: return -param_ * t;
    case BasisKind::custom:
      if (custom_->log_abs) return custom_->log_abs(t);
      break;
    default: break;
  }
  return std::log(std::abs((*this)(t)));
}

SquaredNorm BasisFunction::squared_norm() const {
  switch (kind_) {
    case BasisKind::constant:
    case BasisKind::power: return {false, 0.0};
    case BasisKind::exponential: return {true, 0.5 / param_};
    case BasisKind::tabulated: {
      if (table_->last_value() != 0.0) return {false, 0.0};
      const auto& ts = table_->times();
      const MonotoneTable& tab = *table_;
      double total = tab(ts.front()) * tab(ts.front()) * ts.front();
      for (std::size_t i = 1; i < ts.size(); ++i)
        total += quad([&](double s) { return tab(s) * tab(s); }, ts[i - 1], ts[i]);
      return {true, total};
    }
    case BasisKind::custom: return custom_->norm;
  }
  return {};
}

std::optional<double> BasisFunction::cumulative_square(double t) const {
  switch (kind_) {
    case BasisKind::constant: return t;
    case BasisKind::power: return std::pow(t, 2.0 * param_ + 1.0) / (2.0 * param_ + 1.0);
    case BasisKind::exponential: return -std::expm1(-2.0 * param_ * t) / (2.0 * param_);
    case BasisKind::custom:
      if (custom_->cumulative_square) return custom_->cumulative_square(t);
      break;
    default: break;
  }
  return std::nullopt;
}

std::optional<double> BasisFunction::log_cumulative_square(double t) const {
  if (kind_ == BasisKind::custom && custom_->log_cumulative_square)
    return custom_->log_cumulative_square(t);
  if (auto c = cumulative_square(t)) return std::log(*c);
  return std::nullopt;
}

std::vector<double> BasisFunction::breakpoints() const {
  if (kind_ == BasisKind::tabulated) return table_->times();
  return {};
}

std::string BasisFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case BasisKind::constant: os << "const"; break;
    case BasisKind::power: os << "power lambda=" << param_; break;
    case BasisKind::exponential: os << "exp rate=" << param_; break;
    case BasisKind::tabulated: os << "table knots=" << table_->times().size(); break;
    case BasisKind::custom: os << "custom " << custom_->name; break;
  }
  return os.str();
}

// --- FunctionBasis ----------------------------------------------------------

FunctionBasis::FunctionBasis(std::vector<BasisFunction> functions) : functions_(std::move(functions)) {
  if (functions_.empty()) throw ConfigError("a basis needs at least one function");
}

FunctionBasis FunctionBasis::powers(const std::vector<double>& lambdas) {
  std::vector<BasisFunction> fs;
  fs.reserve(lambdas.size());
  for (double l : lambdas) fs.push_back(BasisFunction::power(l));
  return FunctionBasis(std::move(fs));
}

Vector FunctionBasis::values(double t) const {
  Vector v(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) v(static_cast<Eigen::Index>(i)) = functions_[i](t);
  return v;
}

bool FunctionBasis::all_power_like() const {
  return std::all_of(functions_.begin(), functions_.end(), [](const auto& f) { return f.is_power_like(); });
}

bool FunctionBasis::all_finite_norm() const {
  return std::all_of(functions_.begin(), functions_.end(),
                     [](const auto& f) { return f.squared_norm().finite; });
}

bool FunctionBasis::all_divergent_norm() const {
  return std::none_of(functions_.begin(), functions_.end(),
                      [](const auto& f) { return f.squared_norm().finite; });
}

std::optional<std::vector<double>> FunctionBasis::power_exponents() const {
  if (!all_power_like()) return std::nullopt;
  std::vector<double> out;
  for (const auto& f : functions_) out.push_back(f.exponent_at_zero());
  return out;
}

std::string FunctionBasis::describe() const {
  std::string out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (i) out += "; ";
    out += functions_[i].describe();
  }
  return out;
}

// --- Gramians ---------------------------------------------------------------

namespace {

// Closed form of int_0^t f g for constant/power/exponential pairs.
std::optional<double> closed_form_product(const BasisFunction& f, const BasisFunction& g, double t) {
  const bool inf = std::isinf(t);
  if (f.is_power_like() && g.is_power_like()) {
    const double p = f.exponent_at_zero() + g.exponent_at_zero();
    if (inf) return std::nullopt;
    return std::pow(t, p + 1.0) / (p + 1.0);
  }
  if (f.kind() == BasisKind::exponential && g.kind() == BasisKind::exponential) {
    const double s = f.parameter() + g.parameter();
    return inf ? 1.0 / s : -std::expm1(-s * t) / s;
  }
  const BasisFunction* e = nullptr;
  const BasisFunction* p = nullptr;
  if (f.kind() == BasisKind::exponential && g.is_power_like()) {
    e = &f;
    p = &g;
  } else if (g.kind() == BasisKind::exponential && f.is_power_like()) {
    e = &g;
    p = &f;
  }
  if (e) {
    const double mu = e->parameter();
    const double a = p->exponent_at_zero() + 1.0;
    if (a == 1.0) return inf ? 1.0 / mu : -std::expm1(-mu * t) / mu;
    const double scale = std::pow(mu, -a);
    return inf ? scale * boost::math::tgamma(a) : scale * boost::math::tgamma_lower(a, mu * t);
  }
  return std::nullopt;
}

std::vector<double> merged_breakpoints(const BasisFunction& f, const BasisFunction& g) {
  auto a = f.breakpoints();
  auto b = g.breakpoints();
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

// int_lo^hi f g by adaptive quadrature, split at table knots.
double product_integral(const BasisFunction& f, const BasisFunction& g, double lo, double hi) {
  auto integrand = [&](double s) { return f(s) * g(s); };
  const double p = f.exponent_at_zero() + g.exponent_at_zero();
  std::vector<double> cuts{lo};
  for (double k : merged_breakpoints(f, g))
    if (k > lo && k < hi) cuts.push_back(k);
  if (std::isinf(hi)) {
    const double pivot = std::max(cuts.back(), lo > 0.0 ? lo : 1.0);
    if (pivot > cuts.back()) cuts.push_back(pivot);
  }
  cuts.push_back(hi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    QuadratureOptions opt;
    if (cuts[i] == 0.0 && p != 0.0) opt.lower_singularity = p;
    total += quad(integrand, cuts[i], cuts[i + 1], opt);
  }
  return total;
}

double gramian_entry(const BasisFunction& f, const BasisFunction& g, bool diagonal, double t) {
  if (auto c = closed_form_product(f, g, t)) return *c;
  if (diagonal && !std::isinf(t))
    if (auto c = f.cumulative_square(t)) return *c;
  if (std::isinf(t)) {
    if (diagonal) {
      const auto n = f.squared_norm();
      if (!n.finite) throw ConfigError("Gramian at infinity needs finite-norm functions");
      return n.value;
    }
    if (!f.squared_norm().finite || !g.squared_norm().finite)
      throw ConfigError("Gramian at infinity needs finite-norm functions");
  }
  return product_integral(f, g, 0.0, t);
}

void require_positive_time(double t) {
  if (!(t > 0.0)) {
    std::ostringstream os;
    os << "time must be positive, got " << t;
    throw ConfigError(os.str());
  }
}

}  // namespace

Matrix gramian(const FunctionBasis& basis, double t) {
  require_positive_time(t);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = gramian_entry(basis[static_cast<std::size_t>(i)],
                                     basis[static_cast<std::size_t>(j)], i == j, t);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

std::vector<Matrix> gramians(const FunctionBasis& basis, const std::vector<double>& times) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  std::vector<Matrix> out(times.size(), Matrix::Zero(n, n));
  for (std::size_t k = 0; k < times.size(); ++k) {
    require_positive_time(times[k]);
    if (k && !(times[k] > times[k - 1])) throw ConfigError("gramians: times must increase");
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const auto& f = basis[static_cast<std::size_t>(i)];
      const auto& g = basis[static_cast<std::size_t>(j)];
      const bool closed = closed_form_product(f, g, 1.0).has_value() ||
                          (i == j && f.cumulative_square(1.0).has_value());
      double running = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        double v;
        if (closed) {
          v = gramian_entry(f, g, i == j, times[k]);
        } else {
          running += product_integral(f, g, k ? times[k - 1] : 0.0, times[k]);
          v = running;
        }
        out[k](i, j) = v;
        out[k](j, i) = v;
      }
    }
  return out;
}

Matrix invert_gramian(const Matrix& m, double t) {
  const auto n = m.rows();
  Vector scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(m(i, i) > 0.0)) {
      std::ostringstream os;
      os << "Gramian at t=" << t << " has a non-positive diagonal entry";
      throw IllConditionedError(os.str(), t, std::numeric_limits<double>::infinity());
    }
    scale(i) = 1.0 / std::sqrt(m(i, i));
  }
  const Matrix c = scale.asDiagonal() * m * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond <= kConditionLimit)) {
    std::ostringstream os;
    os << "Gramian at t=" << t << " is ill-conditioned (equilibrated condition number " << cond
       << " > " << kConditionLimit << ")";
    throw IllConditionedError(os.str(), t, cond);
  }
  Eigen::LLT<Matrix> llt(c);
  Matrix inv = llt.solve(Matrix::Identity(n, n));
  Matrix a = scale.asDiagonal() * inv * scale.asDiagonal();
  return 0.5 * (a + a.transpose());
}

Matrix alpha(const FunctionBasis& basis, double t) { return invert_gramian(gramian(basis, t), t); }

Vector phi(const FunctionBasis& basis, double t) { return alpha(basis, t) * basis.values(t); }

GramianState gramian_state(const FunctionBasis& basis, double t) {
  GramianState s;
  s.t = t;
  s.m = gramian(basis, t);
  s.alpha = invert_gramian(s.m, t);
  s.phi = s.alpha * basis.values(t);
  return s;
}

AlphaInfinity alpha_infinity(const FunctionBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  AlphaInfinity out;
  out.zero_rows.resize(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) out.zero_rows[i] = !basis[i].squared_norm().finite;

  if (basis.all_divergent_norm()) {
    out.value = Matrix::Zero(n, n);
    out.method = AlphaInfinity::Method::structural_zero;
    return out;
  }
  if (basis.all_finite_norm()) {
    const double inf = std::numeric_limits<double>::infinity();
    out.value = invert_gramian(gramian(basis, inf), inf);
    out.method = AlphaInfinity::Method::inverse_limit_gramian;
    return out;
  }

  // Mixed: Richardson over geometric horizons assuming a leading 1/T error.
  auto masked = [&](Matrix a) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (out.zero_rows[static_cast<std::size_t>(i)]) {
        a.row(i).setZero();
        a.col(i).setZero();
      }
    return a;
  };
  constexpr double kAgreement = 1e-6;
  double horizon = 64.0;
  Matrix a1 = alpha(basis, horizon);
  Matrix a2 = alpha(basis, 2.0 * horizon);
  double last_err = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 28; ++iter) {
    Matrix a4 = alpha(basis, 4.0 * horizon);
    const Matrix r1 = masked(2.0 * a2 - a1);
    const Matrix r2 = masked(2.0 * a4 - a2);
    last_err = (r2 - r1).cwiseAbs().maxCoeff();
    if (last_err <= kAgreement) {
      out.value = r2;
      out.method = AlphaInfinity::Method::extrapolated;
      out.convergence_estimate = last_err;
      out.horizon = 4.0 * horizon;
      return out;
    }
    horizon *= 2.0;
    a1 = std::move(a2);
    a2 = std::move(a4);
  }
  std::ostringstream os;
  os << "alpha_infinity: extrapolation did not settle below " << kAgreement << " (last disagreement "
     << last_err << " at T=" << 4.0 * horizon << ")";
  throw NonConvergedError(os.str(), last_err);
}

OrthonormalSystem orthonormalize(const FunctionBasis& basis, double t) {
  const Matrix m = gramian(basis, t);
  invert_gramian(m, t);  // condition guard
  const auto n = m.rows();
  auto inner = [&](const Vector& a, const Vector& b) { return a.dot(m * b); };

  Matrix b = Matrix::Identity(n, n);
  auto sweep = [&](Matrix& q) {
    for (Eigen::Index k = 0; k < n; ++k) {
      Vector v = q.col(k);
      for (Eigen::Index j = 0; j < k; ++j) v -= inner(q.col(j), v) * q.col(j);
      const double norm = std::sqrt(inner(v, v));
      if (!(norm > 0.0)) throw IllConditionedError("orthonormalize: dependent basis functions", t, 0.0);
      q.col(k) = v / norm;
    }
  };
  auto defect = [&](const Matrix& q) {
    return (q.transpose() * m * q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  };

  OrthonormalSystem sys;
  sys.t = t;
  sys.basis = basis;
  sweep(b);
  if (defect(b) > 1e-8) {
    sweep(b);
    sys.passes = 2;
    if (const double d = defect(b); d > 1e-8) {
      std::ostringstream os;
      os << "orthonormalize: orthogonality defect " << d << " after re-orthogonalization at t=" << t;
      throw IllConditionedError(os.str(), t, d);
    }
  }
  // Exact upper-triangular structure: entries below the diagonal are never touched.
  sys.b = b.triangularView<Eigen::Upper>();
  return sys;
}

PhiTail phi_tail(const FunctionBasis& basis, double horizon) {
  require_positive_time(horizon);
  const auto n = static_cast<Eigen::Index>(basis.size());
  PhiTail tail;
  tail.value = Matrix::Zero(n, n);
  if (auto lambdas = basis.power_exponents()) {
    // phi_i(u) = c_i u^{-lambda_i - 1} with c = alpha_1 * ones (Gramian scaling).
    const Vector c = alpha(basis, 1.0) * Vector::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const double p = (*lambdas)[static_cast<std::size_t>(i)] + (*lambdas)[static_cast<std::size_t>(j)] + 1.0;
        tail.value(i, j) = c(i) * c(j) * std::pow(horizon, -p) / p;
      }
    tail.method = PhiTail::Method::power_closed_form;
    return tail;
  }
  if (n == 1 && basis[0].kind() == BasisKind::exponential) {
    // phi(u) = mu / sinh(mu u); int_T^inf phi^2 = mu (coth(mu T) - 1)
    const double mu = basis[0].parameter();
    tail.value(0, 0) = 2.0 * mu / std::expm1(2.0 * mu * horizon);
    tail.method = PhiTail::Method::exponential_closed_form;
    return tail;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      auto integrand = [&](double u) {
        const Vector p = phi(basis, u);
        return p(i) * p(j);
      };
      QuadratureOptions opt;
      opt.abs_tol = 1e-14;
      const double v = quad(integrand, horizon, std::numeric_limits<double>::infinity(), opt);
      tail.value(i, j) = v;
      tail.value(j, i) = v;
    }
  tail.method = PhiTail::Method::quadrature;
  return tail;
}

AlphaIdentityReport verify_alpha_identity(const FunctionBasis& basis, double t, double horizon) {
  require_positive_time(t);
  if (!(horizon > t)) throw ConfigError("verify_alpha_identity needs horizon > t");
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix body(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      auto integrand = [&](double u) {
        const Vector p = phi(basis, u);
        return p(i) * p(j);
      };
      QuadratureOptions opt;
      opt.abs_tol = 1e-14;
      const double v = quad(integrand, t, horizon, opt);
      body(i, j) = v;
      body(j, i) = v;
    }
  AlphaIdentityReport r;
  r.tail = phi_tail(basis, horizon);
  r.residual = alpha(basis, t) - body - alpha_infinity(basis).value - r.tail.value;
  r.max_abs = r.residual.cwiseAbs().maxCoeff();
  return r;
}

}  // namespace goursat
