#pragma once

#include "goursat/kernel.h"
#include "goursat/paths.h"
#include "goursat/transform.h"

#include <functional>
#include <optional>
#include <variant>

namespace goursat {

// psi(u) = alpha_{t1} int_0^u f(s) ds.
Vector psi(const FunctionBasis& basis, double u, double t1);

struct BridgeSpec {
  FunctionBasis basis;
  double t1 = 1.0;
  Vector y;

  void validate() const;
};

// B^y_u = B_u - psi^*(u) (I_{t1}(B) - y) on the grid nodes up to t1 (a node);
// the value at t1 is the continuous extension of the psi form.
class GeneralizedBridge {
 public:
  GeneralizedBridge(BridgeSpec spec, GridPtr grid);
  SamplePath apply(const SamplePath& b) const;
  const GridPtr& output_grid() const { return out_grid_; }

 private:
  BridgeSpec spec_;
  GridPtr grid_;
  GridPtr out_grid_;
  Matrix weights_;
  Matrix psi_;  // psi at output nodes
};

SamplePath generalized_bridge(const BridgeSpec& spec, const SamplePath& b);

struct FixedY {
  Vector value;
};
// Y ~ N(0, alpha_inf); components on zero rows are exactly 0.
struct GaussianAlphaInfinityY {};
struct CustomY {
  std::function<Vector(std::mt19937_64&)> sample;
};
using YSource = std::variant<FixedY, GaussianAlphaInfinityY, CustomY>;

struct SolutionSpec {
  GoursatKernel kernel;
  YSource y = FixedY{};
  // Required by GaussianAlphaInfinityY; fill with kernel.alpha_infinity().
  std::optional<Matrix> alpha_infinity;
  double tolerance = 1e-4;  // truncation tolerance passed to x_zero
};

struct SdeSolution {
  SamplePath path;
  Vector y;
  double truncation_bound = 0.0;
};

// Factor L with L L^* = a for PSD a, built on the rows that are not identically
// zero; the remaining rows of L are exactly 0.
Matrix psd_factor(const Matrix& a);

// X = X0 + (int_0^. f^*) Y with Y drawn from spec.y on substream (index, endpoint).
class SdeSolver {
 public:
  SdeSolver(SolutionSpec spec, GridPtr driver_grid, double horizon);
  SdeSolution solve(const SamplePath& driver, const RngSpec& rng, std::uint64_t index) const;
  SdeSolution solve_with(const SamplePath& driver, const Vector& y) const;
  const GridPtr& output_grid() const { return x0_.output_grid(); }
  double truncation_bound() const { return x0_.truncation_bound(); }

 private:
  SolutionSpec spec_;
  XZero x0_;
  Matrix factor_;
  Matrix cumulative_;  // int_0^{t_k} f at output nodes
};

SdeSolution sde_solution(const SolutionSpec& spec, const SamplePath& driver, double horizon,
                         const RngSpec& rng, std::uint64_t index);

}  // namespace goursat
