#pragma once

#include "goursat/kernel.h"
#include "goursat/paths.h"

#include <optional>

namespace goursat {

struct TransformReport {
  SamplePath output;
  // max |drift on the full grid - drift on every other node| over shared nodes
  double convergence_estimate = 0.0;
  double eps0 = 0.0;
  // g(eps0) * (2/3) eps0: what extending g by g(eps0) (u / eps0)^{1/2} below eps0
  // would add. Reported only; never included in the output.
  double eps0_contribution = 0.0;
};

// phi at each node of a grid; generic kernels reuse incremental Gramians.
Matrix phi_on_nodes(const GoursatKernel& kernel, const std::vector<double>& times);

// Sigma(X)_{t_k} = x_k - int_{eps0}^{t_k} g(u) du, g(u) = phi^*(u) I_u, by the trapezoid
// rule in log u, with I the running Ito sums of f against X. Tables depend only on the grid, so one
// instance serves a whole ensemble.
class VolterraTransform {
 public:
  VolterraTransform(const GoursatKernel& kernel, GridPtr grid);
  TransformReport apply(const SamplePath& path) const;
  const GridPtr& grid() const { return grid_; }
  const Matrix& weights() const { return weights_; }
  const Matrix& phi() const { return phi_; }

 private:
  GridPtr grid_;
  Matrix weights_;
  Matrix phi_;
};

TransformReport volterra_transform(const GoursatKernel& kernel, const SamplePath& path);
// m-fold composition; m = 0 returns the input.
SamplePath iterate_transform(const GoursatKernel& kernel, const SamplePath& path, unsigned m);

// L_n(x) by the three-term recurrence.
double laguerre(unsigned n, double x);
// sum_i L_n(log(t_k / s_i)) (x_{i+1} - x_i), with s_i the log-midpoint
// sqrt(t_i t_{i+1}) and s = eps0 for the increment from the origin.
SamplePath laguerre_direct(unsigned n, const SamplePath& path);

struct XZeroResult {
  SamplePath path;  // on [eps0, T]
  double truncation_bound = 0.0;  // trace of int_{T_max}^inf phi phi^*
  double t_max = 0.0;
};

// X0_t = W_t - int_0^t (J_{T_max} - J_u)^* f(u) du with J_u = int_0^u phi dW.
// The driver grid must extend to T_max = grid->end() >= 10 T.
class XZero {
 public:
  XZero(const GoursatKernel& kernel, GridPtr driver_grid, double horizon, double tolerance = 1e-4);
  XZeroResult apply(const SamplePath& wiener) const;
  const GridPtr& output_grid() const { return out_grid_; }
  double truncation_bound() const { return bound_; }

 private:
  GridPtr grid_;
  GridPtr out_grid_;
  Matrix phi_weights_;
  Matrix f_nodes_;
  Vector origin_integral_;
  double origin_weight_ = 0.0;
  double bound_ = 0.0;
};

XZeroResult x_zero(const GoursatKernel& kernel, const SamplePath& wiener, double horizon,
                   double tolerance = 1e-4);

struct RecoveredY {
  Vector value;                    // alpha_T I_T(X)
  std::optional<Vector> at_half;   // alpha_{T/2} I_{T/2}(X) when T/2 is a node
  std::optional<Vector> at_quarter;
  double horizon = 0.0;
};

class YRecovery {
 public:
  YRecovery(const FunctionBasis& basis, GridPtr grid, double horizon);
  RecoveredY apply(const SamplePath& x) const;

 private:
  GridPtr grid_;
  Matrix weights_;
  double horizon_;
  std::vector<std::pair<std::size_t, Matrix>> alphas_;  // node index, alpha there
};

RecoveredY recover_y(const FunctionBasis& basis, const SamplePath& x, double horizon);

}  // namespace goursat
