#include "goursat/kernel.h"

#include "goursat/errors.h"
#include "goursat/io.h"
#include "goursat/quadrature.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace goursat {
namespace {

void validate_lambdas(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw ConfigError("Muntz kernel needs at least one exponent");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > -0.5) || !std::isfinite(lambdas[i]))
      throw ConfigError("Muntz exponents must exceed -1/2");
    for (std::size_t j = 0; j < i; ++j)
      if (lambdas[i] == lambdas[j]) throw ConfigError("Muntz exponents must be pairwise distinct");
  }
}

// Product formula with denominator prod_{i != j} (lambda_i - lambda_j).
Vector printed_coefficients(const std::vector<double>& l) {
  const auto n = l.size();
  Vector a(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    double num = 1.0, den = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      num *= l[i] + l[j] + 1.0;
      if (i != j) den *= l[i] - l[j];
    }
    a(static_cast<Eigen::Index>(j)) = num / den;
  }
  return a;
}

bool close_to(const Vector& a, const Vector& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() <= 1e-7 * scale;
}

double cumulative_square(const BasisFunction& b, double t) {
  if (auto c = b.cumulative_square(t)) return *c;
  return gramian(FunctionBasis({b}), t)(0, 0);
}

double log_cumulative_square(const BasisFunction& b, double t) {
  if (auto c = b.log_cumulative_square(t)) return *c;
  return std::log(cumulative_square(b, t));
}

bool has_log_forms(const BasisFunction& b) { return b.kind() == BasisKind::custom; }

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

void require_ordered(double s, double t, const char* what) {
  if (!(s > 0.0) || !(s <= t)) {
    std::ostringstream os;
    os << what << ": needs 0 < s <= t, got s=" << s << ", t=" << t;
    throw ConfigError(os.str());
  }
}

}  // namespace

MuntzFormulaAudit audit_muntz_formula(const std::vector<double>& lambdas) {
  validate_lambdas(lambdas);
  MuntzFormulaAudit audit;
  const auto basis = FunctionBasis::powers(lambdas);
  audit.oracle = alpha(basis, 1.0) * Vector::Ones(static_cast<Eigen::Index>(lambdas.size()));
  audit.printed = printed_coefficients(lambdas);
  const double flip = lambdas.size() % 2 == 0 ? -1.0 : 1.0;  // (-1)^{n-1}
  audit.flipped = flip * audit.printed;
  audit.printed_matches = close_to(audit.printed, audit.oracle);
  audit.flipped_matches = close_to(audit.flipped, audit.oracle);
  return audit;
}

Vector muntz_coefficients(const std::vector<double>& lambdas) {
  const auto audit = audit_muntz_formula(lambdas);
  if (audit.flipped_matches) return audit.flipped;
  if (audit.printed_matches) return audit.printed;
  std::ostringstream os;
  os << "Muntz coefficients disagree with the Gramian oracle for every sign convention";
  throw NumericalError(os.str());
}

// --- GoursatKernel -----------------------------------------------------------

GoursatKernel GoursatKernel::generic(FunctionBasis basis) { return GoursatKernel(KernelForm::generic, std::move(basis)); }

GoursatKernel GoursatKernel::muntz(const std::vector<double>& lambdas) {
  return muntz_unchecked(lambdas, muntz_coefficients(lambdas));
}

GoursatKernel GoursatKernel::muntz_unchecked(const std::vector<double>& lambdas, Vector coefficients) {
  validate_lambdas(lambdas);
  if (coefficients.size() != static_cast<Eigen::Index>(lambdas.size()))
    throw ConfigError("Muntz coefficient count does not match the exponents");
  GoursatKernel k(KernelForm::muntz, FunctionBasis::powers(lambdas));
  k.coefficients_ = std::move(coefficients);
  k.lambdas_ = lambdas;
  return k;
}

GoursatKernel GoursatKernel::order_one(BasisFunction b) {
  return GoursatKernel(KernelForm::order1, FunctionBasis({std::move(b)}));
}

double GoursatKernel::operator()(double t, double s) const {
  if (!(t > 0.0)) throw ConfigError("kernel time must be positive");
  if (s > t) return 0.0;
  switch (form_) {
    case KernelForm::muntz: {
      double sum = 0.0;
      const double r = s / t;
      for (std::size_t j = 0; j < lambdas_.size(); ++j)
        sum += coefficients_(static_cast<Eigen::Index>(j)) * std::pow(r, lambdas_[j]);
      return sum / t;
    }
    case KernelForm::order1: {
      const auto& b = basis_[0];
      if (has_log_forms(b)) {
        const double sign = sign_of(b(t)) * sign_of(b(s));
        return sign * std::exp(b.log_abs(t) + b.log_abs(s) - log_cumulative_square(b, t));
      }
      return b(t) * b(s) / cumulative_square(b, t);
    }
    case KernelForm::generic: return left_factor(t).dot(basis_.values(s));
  }
  return 0.0;
}

Vector GoursatKernel::left_factor(double t) const {
  switch (form_) {
    case KernelForm::muntz: {
      Vector p(coefficients_.size());
      for (Eigen::Index i = 0; i < p.size(); ++i)
        p(i) = coefficients_(i) * std::pow(t, -lambdas_[static_cast<std::size_t>(i)] - 1.0);
      return p;
    }
    case KernelForm::order1: {
      const auto& b = basis_[0];
      Vector p(1);
      if (has_log_forms(b))
        p(0) = sign_of(b(t)) * std::exp(b.log_abs(t) - log_cumulative_square(b, t));
      else
        p(0) = b(t) / cumulative_square(b, t);
      return p;
    }
    case KernelForm::generic: return phi(basis_, t);
  }
  return {};
}

Matrix GoursatKernel::phi_tail(double horizon) const {
  switch (form_) {
    case KernelForm::muntz: {
      const auto n = coefficients_.size();
      Matrix m(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const double p = lambdas_[static_cast<std::size_t>(i)] + lambdas_[static_cast<std::size_t>(j)] + 1.0;
          m(i, j) = coefficients_(i) * coefficients_(j) * std::pow(horizon, -p) / p;
        }
      return m;
    }
    case KernelForm::order1: {
      // d/du (1/B(u)) = -b(u)^2 / B(u)^2
      const auto& b = basis_[0];
      const auto norm = b.squared_norm();
      Matrix m(1, 1);
      m(0, 0) = std::exp(-log_cumulative_square(b, horizon)) - (norm.finite ? 1.0 / norm.value : 0.0);
      return m;
    }
    case KernelForm::generic: return goursat::phi_tail(basis_, horizon).value;
  }
  return {};
}

Matrix GoursatKernel::alpha_infinity() const {
  const auto n = static_cast<Eigen::Index>(order());
  switch (form_) {
    case KernelForm::muntz: return Matrix::Zero(n, n);
    case KernelForm::order1: {
      const auto norm = basis_[0].squared_norm();
      Matrix m(1, 1);
      m(0, 0) = norm.finite ? 1.0 / norm.value : 0.0;
      return m;
    }
    case KernelForm::generic: return goursat::alpha_infinity(basis_).value;
  }
  return {};
}

double GoursatKernel::min_exponent() const {
  double p = basis_[0].exponent_at_zero();
  for (const auto& f : basis_.functions()) p = std::min(p, f.exponent_at_zero());
  return p;
}

std::string GoursatKernel::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (form_) {
    case KernelForm::muntz:
      os << "muntz ";
      for (std::size_t i = 0; i < lambdas_.size(); ++i) os << (i ? "," : "") << lambdas_[i];
      break;
    case KernelForm::order1: os << "order1 " << basis_[0].describe(); break;
    case KernelForm::generic: os << "generic [" << basis_.describe() << "]"; break;
  }
  return os.str();
}

// --- kernel system -----------------------------------------------------------

KernelSystem::KernelSystem(FunctionBasis basis, double t) : basis_(std::move(basis)), t_(t) {
  alpha_ = goursat::alpha(basis_, t);
}

double KernelSystem::operator()(double u, double v) const {
  if (!(u > 0.0 && u <= t_ && v > 0.0 && v <= t_)) {
    std::ostringstream os;
    os << "kernel system on (0, " << t_ << "] evaluated at (" << u << ", " << v << ")";
    throw ConfigError(os.str());
  }
  return basis_.values(u).dot(alpha_ * basis_.values(v));
}

// --- identity checks ---------------------------------------------------------

Residual check_self_reproduction(const GoursatKernel& k, double t, double s) {
  require_ordered(s, t, "check_self_reproduction");
  QuadratureOptions opt;
  opt.abs_tol = 1e-15;
  if (const double p = 2.0 * k.min_exponent(); p != 0.0) opt.lower_singularity = p;
  const auto r = integrate([&](double u) { return k(t, u) * k(s, u); }, 0.0, s, opt);
  const double lhs = k(t, s);
  Residual out;
  out.value = lhs - r.value;
  out.relative = std::abs(out.value) / std::max({std::abs(lhs), r.l1, 1e-300});
  return out;
}

Residual check_tail_reproduction(const GoursatKernel& k, double t, double s, double horizon) {
  require_ordered(s, t, "check_tail_reproduction");
  if (!(horizon > t)) throw ConfigError("check_tail_reproduction: horizon must exceed t");
  QuadratureOptions opt;
  opt.abs_tol = 1e-15;
  const auto body = integrate([&](double u) { return k(u, t) * k(u, s); }, t, horizon, opt);
  const Vector ft = k.basis().values(t);
  const Vector fs = k.basis().values(s);
  const double limit_term = ft.dot(k.alpha_infinity() * fs);
  const double tail_term = ft.dot(k.phi_tail(horizon) * fs);
  const double lhs = k(t, s);
  Residual out;
  out.value = lhs - body.value - limit_term - tail_term;
  const double scale = std::max({std::abs(lhs), body.l1 + std::abs(limit_term) + std::abs(tail_term), 1e-300});
  out.relative = std::abs(out.value) / scale;
  return out;
}

IntegrabilityVerdict check_integrability(const GoursatKernel& k, double t) {
  if (!(t > 0.0)) throw ConfigError("check_integrability: t must be positive");
  // int_0^u k(u,v)^2 dv: closed form u^{-1} sum a_i a_j / (lambda_i + lambda_j + 1)
  // for Muntz coefficients, b(u)^2 / B(u) for order 1, f^* alpha_u f otherwise.
  double muntz_scale = 0.0;
  if (k.form() == KernelForm::muntz) {
    const auto& a = k.coefficients();
    const auto l = k.basis().power_exponents().value();
    for (Eigen::Index i = 0; i < a.size(); ++i)
      for (Eigen::Index j = 0; j < a.size(); ++j)
        muntz_scale += a(i) * a(j) / (l[static_cast<std::size_t>(i)] + l[static_cast<std::size_t>(j)] + 1.0);
  }
  auto inner = [&](double u) {
    switch (k.form()) {
      case KernelForm::muntz: return muntz_scale / u;
      case KernelForm::order1: {
        const auto& b = k.basis()[0];
        return std::exp(2.0 * b.log_abs(u) - log_cumulative_square(b, u));
      }
      case KernelForm::generic: break;
    }
    return k.basis().values(u).dot(phi(k.basis(), u));
  };
  // Integrated in x = log u so every decade has the same width.
  auto integrand = [&](double x) {
    const double u = std::exp(x);
    return std::sqrt(std::max(inner(u), 0.0)) * u;
  };

  // Decade panels (t 10^{-(j+1)}, t 10^{-j}]. Divergence: six consecutive panels
  // each keep at least a tenth of the outermost panel's mass.
  constexpr int kMaxPanels = 60;
  constexpr int kWindow = 6;
  IntegrabilityVerdict v;
  std::vector<double> panels;
  double sum = 0.0;
  for (int j = 0; j < kMaxPanels; ++j) {
    const double hi = t * std::pow(10.0, -j);
    const double lo = hi / 10.0;
    QuadratureOptions opt;
    opt.abs_tol = 1e-300;
    double p;
    try {
      p = quad(integrand, std::log(lo), std::log(hi), opt);
    } catch (const NumericalError&) {
      v.finite = false;
      v.value = sum;
      v.panels = j;
      return v;
    }
    panels.push_back(p);
    sum += p;
    v.panels = j + 1;
    if (j >= 1 && p <= 1e-12 * sum) {
      const double q = panels[static_cast<std::size_t>(j)] / panels[static_cast<std::size_t>(j - 1)];
      v.finite = true;
      v.value = sum + (q < 1.0 ? p * q / (1.0 - q) : 0.0);
      return v;
    }
    if (j >= kWindow) {
      const bool stalled = std::all_of(panels.end() - kWindow, panels.end(),
                                       [&](double x) { return x >= 0.1 * panels.front(); });
      if (stalled) {
        v.finite = false;
        v.value = sum;
        return v;
      }
    }
  }
  v.finite = panels.back() < 0.1 * panels.front();
  v.value = sum;
  return v;
}

HardyReport hardy_apply(const GoursatKernel& k, const std::vector<double>& grid,
                        const std::vector<double>& values) {
  if (grid.size() < 2 || values.size() + 1 != grid.size())
    throw ConfigError("hardy_apply: need one value per grid cell");
  if (!(grid[0] >= 0.0)) throw ConfigError("hardy_apply: grid must start at or after 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ConfigError("hardy_apply: grid must be strictly increasing");

  HardyReport r;
  const auto n = static_cast<Eigen::Index>(k.order());
  Vector running = Vector::Zero(n);
  double in2 = 0.0, out2 = 0.0;
  r.times.reserve(values.size());
  r.output.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double width = grid[i + 1] - grid[i];
    // f may be singular at 0, so the first cell is sampled at its midpoint.
    const double left = grid[i] > 0.0 ? grid[i] : 0.5 * grid[i + 1];
    running += k.basis().values(left) * (values[i] * width);
    const double kg = k.left_factor(grid[i + 1]).dot(running);
    r.times.push_back(grid[i + 1]);
    r.output.push_back(kg);
    in2 += values[i] * values[i] * width;
    out2 += kg * kg * width;
  }
  r.input_norm = std::sqrt(in2);
  r.output_norm = std::sqrt(out2);
  r.ratio = in2 > 0.0 ? r.output_norm / r.input_norm : 0.0;
  return r;
}

GoursatKernel parse_kernel(const std::string& spec, const std::string& base_dir) {
  std::istringstream in(spec);
  std::string head;
  if (!(in >> head)) throw ConfigError("empty kernel specification");
  std::string rest;
  std::getline(in, rest);
  const auto b = rest.find_first_not_of(" \t");
  rest = b == std::string::npos ? std::string() : rest.substr(b);
  if (head == "const") {
    if (!rest.empty()) throw ConfigError("'const' kernel takes no arguments");
    return GoursatKernel::constant();
  }
  if (head == "muntz") {
    std::string compact;
    for (char c : rest)
      if (c != ' ' && c != '\t') compact += c;
    if (compact.empty()) throw ConfigError("'muntz' kernel needs a comma separated exponent list");
    return GoursatKernel::muntz(parse_double_list(compact));
  }
  if (head == "order1") {
    if (rest.empty()) throw ConfigError("'order1' kernel needs a basis function");
    return GoursatKernel::order_one(parse_basis_function(rest, base_dir));
  }
  if (head == "generic") {
    if (rest.empty()) throw ConfigError("'generic' kernel needs a basis file");
    std::filesystem::path p = rest;
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return GoursatKernel::generic(load_basis_file(p.string()));
  }
  throw ConfigError("unknown kernel kind '" + head + "'");
}

}  // namespace goursat
