#pragma once

#include <functional>
#include <optional>

namespace goursat {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  unsigned max_depth = 15;  // bisections (GK) or refinement levels (tanh-sinh)
  // Leading behaviour (s - a)^p of the integrand at the lower endpoint, p > -1.
  // When set, the panel variable is v with s = a + (b - a) v^{1/(p+1)}, which
  // turns the singular factor into a constant, and the panel uses tanh-sinh.
  std::optional<double> lower_singularity;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  double l1 = 0.0;     // rule estimate of the integral of |fn|, a scale for relative checks
};

// Adaptive Gauss-Kronrod (7/15) integration of fn over (a, b). b may be +infinity,
// in which case the tail is mapped onto (0, 1] with u = a / v (a > 0) or split at 1.
// Throws QuadratureError when the error estimate misses the tolerance after max_depth
// bisections or when fn returns a non-finite value.
QuadratureResult integrate(const std::function<double(double)>& fn, double a, double b,
                           const QuadratureOptions& options = {});

inline double quad(const std::function<double(double)>& fn, double a, double b,
                   const QuadratureOptions& options = {}) {
  return integrate(fn, a, b, options).value;
}

}  // namespace goursat
