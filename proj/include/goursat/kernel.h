#pragma once

#include "goursat/basis.h"

#include <string>
#include <vector>

namespace goursat {

enum class KernelForm { generic, muntz, order1 };

// k(t, s) = phi^*(t) f(s) for 0 < s <= t and 0 otherwise, with phi = alpha f.
// The Muntz and order-1 forms evaluate phi in closed form; all forms expose the
// same factorization so transforms never need the bivariate kernel itself.
class GoursatKernel {
 public:
  static GoursatKernel generic(FunctionBasis basis);
  // Coefficients validated against the Gramian oracle (see muntz_coefficients).
  static GoursatKernel muntz(const std::vector<double>& lambdas);
  // No validation; used to build deliberately wrong kernels for negative controls.
  static GoursatKernel muntz_unchecked(const std::vector<double>& lambdas, Vector coefficients);
  static GoursatKernel order_one(BasisFunction b);
  static GoursatKernel constant() { return muntz({0.0}); }

  KernelForm form() const { return form_; }
  std::size_t order() const { return basis_.size(); }
  const FunctionBasis& basis() const { return basis_; }
  // Empty unless form() == muntz.
  const Vector& coefficients() const { return coefficients_; }

  double operator()(double t, double s) const;
  // phi(t), the left Goursat factor.
  Vector left_factor(double t) const;
  // int_T^inf phi phi^*, closed form for Muntz and order-1 kernels.
  Matrix phi_tail(double horizon) const;
  Matrix alpha_infinity() const;
  // Leading exponent of f near 0, used to pick quadrature substitutions.
  double min_exponent() const;
  std::string describe() const;

 private:
  GoursatKernel(KernelForm form, FunctionBasis basis) : form_(form), basis_(std::move(basis)) {}

  KernelForm form_;
  FunctionBasis basis_;
  Vector coefficients_;
  std::vector<double> lambdas_;
};

// Coefficients a_j of k(t,s) = t^{-1} sum_j a_j (s/t)^{lambda_j} for distinct
// lambda_j > -1/2. The sign of the closed-form product is fixed by comparing
// against phi(1) = alpha_1 * ones computed from the Gramian.
Vector muntz_coefficients(const std::vector<double>& lambdas);

struct MuntzFormulaAudit {
  Vector oracle;            // alpha_1 * ones
  Vector printed;           // products with denominator prod_{i != j} (lambda_i - lambda_j)
  Vector flipped;           // denominator prod_{i != j} (lambda_j - lambda_i)
  bool printed_matches = false;
  bool flipped_matches = false;
};
MuntzFormulaAudit audit_muntz_formula(const std::vector<double>& lambdas);

// kappa_t(u, v) = f^*(u) alpha_t f(v) on (0, t]^2.
class KernelSystem {
 public:
  KernelSystem(FunctionBasis basis, double t);
  double t() const { return t_; }
  const Matrix& alpha() const { return alpha_; }
  double operator()(double u, double v) const;

 private:
  FunctionBasis basis_;
  double t_;
  Matrix alpha_;
};

inline KernelSystem kernel_system(const FunctionBasis& basis, double t) { return KernelSystem(basis, t); }

struct Residual {
  double value = 0.0;
  double relative = 0.0;  // |value| over the scale of the terms being compared
};

// k(t,s) - int_0^s k(t,u) k(s,u) du.
Residual check_self_reproduction(const GoursatKernel& k, double t, double s);
// k(t,s) - int_t^T k(u,t) k(u,s) du - f^*(t) alpha_inf f(s) - analytic tail beyond T.
Residual check_tail_reproduction(const GoursatKernel& k, double t, double s, double horizon);

struct IntegrabilityVerdict {
  bool finite = false;
  double value = 0.0;  // integral when finite, partial sum otherwise
  int panels = 0;
};
// int_0^t (int_0^u k^2(u,v) dv)^{1/2} du over decade panels toward 0.
IntegrabilityVerdict check_integrability(const GoursatKernel& k, double t);

struct HardyReport {
  std::vector<double> times;   // right ends of the cells
  std::vector<double> output;  // (K g) at those times
  double input_norm = 0.0;
  double output_norm = 0.0;
  double ratio = 0.0;
};
// (K g)(u) = int_0^u k(u, r) g(r) dr for a step function g taking value values[i]
// on [grid[i], grid[i+1]); left-endpoint sums through the Goursat factorization.
HardyReport hardy_apply(const GoursatKernel& k, const std::vector<double>& grid,
                        const std::vector<double>& values);

// `muntz 0,1,2.5` | `order1 <basis line>` | `generic <basis file>` | `const`.
GoursatKernel parse_kernel(const std::string& spec, const std::string& base_dir = ".");

}  // namespace goursat
