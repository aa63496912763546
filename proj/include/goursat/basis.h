#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace goursat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class BasisKind { constant, power, exponential, tabulated, custom };

// Squared L2 norm over (0, inf); `finite == false` means the integral diverges.
struct SquaredNorm {
  bool finite = false;
  double value = 0.0;
};

// A user-supplied function that is not one of the closed-form kinds. Optional
// hooks let kernels work in log space where the plain value under/overflows.
struct CustomFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> log_abs;                // log|f(t)|
  std::function<double(double)> cumulative_square;      // int_0^t f^2
  std::function<double(double)> log_cumulative_square;  // log int_0^t f^2
  SquaredNorm norm;
  double exponent_at_zero = 0.0;  // f(s) ~ s^p as s -> 0
};

class MonotoneTable;

class BasisFunction {
 public:
  static BasisFunction constant();
  // s^lambda, lambda > -1/2.
  static BasisFunction power(double lambda);
  // exp(-rate s), rate > 0.
  static BasisFunction exponential(double rate);
  // Monotone cubic interpolation of (times, values); times strictly increasing
  // and positive. Outside the table the nearest end value is held.
  static BasisFunction tabulated(std::vector<double> times, std::vector<double> values);
  static BasisFunction custom(CustomFunction fn);
  // t^{-1} exp(-1/t), whose order-1 kernel is well defined but not integrable.
  static BasisFunction inverse_exponential();

  BasisKind kind() const { return kind_; }
  // lambda for power, rate for exponential, 0 otherwise.
  double parameter() const { return param_; }
  bool is_power_like() const { return kind_ == BasisKind::constant || kind_ == BasisKind::power; }
  double exponent_at_zero() const;

  double operator()(double t) const;
  double log_abs(double t) const;
  SquaredNorm squared_norm() const;
  // int_0^t f^2 when a closed form is known.
  std::optional<double> cumulative_square(double t) const;
  std::optional<double> log_cumulative_square(double t) const;
  // Interior knots where the function is only piecewise smooth.
  std::vector<double> breakpoints() const;
  std::string describe() const;

 private:
  BasisFunction(BasisKind kind, double param) : kind_(kind), param_(param) {}

  BasisKind kind_;
  double param_;
  std::shared_ptr<const MonotoneTable> table_;
  std::shared_ptr<const CustomFunction> custom_;
};

class FunctionBasis {
 public:
  FunctionBasis() = default;
  explicit FunctionBasis(std::vector<BasisFunction> functions);

  static FunctionBasis constant() { return FunctionBasis({BasisFunction::constant()}); }
  // (s^{lambda_1}, ..., s^{lambda_n}); lambda = 0 is stored as the constant kind.
  static FunctionBasis powers(const std::vector<double>& lambdas);

  std::size_t size() const { return functions_.size(); }
  const BasisFunction& operator[](std::size_t i) const { return functions_[i]; }
  const std::vector<BasisFunction>& functions() const { return functions_; }

  Vector values(double t) const;
  bool all_power_like() const;
  bool all_finite_norm() const;
  bool all_divergent_norm() const;
  // Exponents when every function is power-like.
  std::optional<std::vector<double>> power_exponents() const;
  std::string describe() const;

 private:
  std::vector<BasisFunction> functions_;
};

struct GramianState {
  double t = 0.0;
  Matrix m;      // Gramian int_0^t f f^*
  Matrix alpha;  // its inverse
  Vector phi;    // alpha f(t)
};

struct AlphaInfinity {
  Matrix value;
  std::vector<bool> zero_rows;  // true exactly for divergent-norm functions
  // How the limit was obtained and how well it is pinned down.
  enum class Method { structural_zero, inverse_limit_gramian, extrapolated } method =
      Method::structural_zero;
  double convergence_estimate = 0.0;
  double horizon = 0.0;  // largest T used by extrapolation
};

struct OrthonormalSystem {
  double t = 0.0;
  Matrix b;  // upper triangular, positive diagonal; column k holds the coefficients of q_k
  FunctionBasis basis;
  int passes = 1;  // Gram-Schmidt sweeps needed

  Vector operator()(double u) const { return b.transpose() * basis.values(u); }
};

// Matrix-valued tail int_T^inf phi phi^* and how it was obtained.
struct PhiTail {
  Matrix value;
  enum class Method { power_closed_form, exponential_closed_form, quadrature } method;
};

struct AlphaIdentityReport {
  Matrix residual;
  double max_abs = 0.0;
  PhiTail tail;
};

constexpr double kConditionLimit = 1e12;

// Gramian int_0^t f f^* with closed forms for constant/power/exponential pairs
// and adaptive quadrature (relative tolerance 1e-10) otherwise. t may be +inf
// when every function involved has finite norm.
Matrix gramian(const FunctionBasis& basis, double t);
// Gramians at increasing times; quadrature entries are accumulated panel by panel.
std::vector<Matrix> gramians(const FunctionBasis& basis, const std::vector<double>& times);

// Inverse of a Gramian via an equilibrated Cholesky factorization. `t` is only
// used in the error message when the equilibrated condition number exceeds 1e12.
Matrix invert_gramian(const Matrix& m, double t);

Matrix alpha(const FunctionBasis& basis, double t);
Vector phi(const FunctionBasis& basis, double t);
GramianState gramian_state(const FunctionBasis& basis, double t);

AlphaInfinity alpha_infinity(const FunctionBasis& basis);
OrthonormalSystem orthonormalize(const FunctionBasis& basis, double t);

// Analytic tail for pure power bases and a single exponential, quadrature otherwise.
PhiTail phi_tail(const FunctionBasis& basis, double horizon);
// alpha_t - int_t^T phi phi^* - alpha_inf - int_T^inf phi phi^*.
AlphaIdentityReport verify_alpha_identity(const FunctionBasis& basis, double t, double horizon);

// --- text specs -----------------------------------------------------------

// One function per line: `power lambda=<x>`, `exp rate=<x>`, `const`, `table file=<path>`.
// Relative table paths resolve against `base_dir`. Blank lines and `#` comments are skipped.
FunctionBasis parse_basis(const std::string& text, const std::string& base_dir = ".");
BasisFunction parse_basis_function(const std::string& line, const std::string& base_dir = ".");
FunctionBasis load_basis_file(const std::string& path);
// Two-column whitespace or comma separated (time, value) file.
BasisFunction load_table(const std::string& path);

}  // namespace goursat
