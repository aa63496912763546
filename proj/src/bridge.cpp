#include "goursat/bridge.h"

#include "goursat/errors.h"

#include <cmath>
#include <sstream>

namespace goursat {

Vector psi(const FunctionBasis& basis, double u, double t1) {
  if (!(u > 0.0 && u <= t1)) throw ConfigError("psi needs 0 < u <= t1");
  return alpha(basis, t1) * basis_integral(basis, u);
}

void BridgeSpec::validate() const {
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw ConfigError("bridge horizon t1 must be positive");
  if (y.size() != static_cast<Eigen::Index>(basis.size()))
    throw ConfigError("bridge endpoint must have one entry per basis function");
  if (!y.allFinite()) throw ConfigError("bridge endpoint must be finite");
}

GeneralizedBridge::GeneralizedBridge(BridgeSpec spec, GridPtr grid) : spec_(std::move(spec)), grid_(std::move(grid)) {
  spec_.validate();
  out_grid_ = grid_->prefix(spec_.t1);
  weights_ = increment_weights(spec_.basis, *out_grid_);
  const Matrix a = alpha(spec_.basis, spec_.t1);
  psi_.resize(static_cast<Eigen::Index>(spec_.basis.size()), static_cast<Eigen::Index>(out_grid_->size()));
  for (std::size_t k = 0; k < out_grid_->size(); ++k)
    psi_.col(static_cast<Eigen::Index>(k)) = a * basis_integral(spec_.basis, (*out_grid_)[k]);
}

SamplePath GeneralizedBridge::apply(const SamplePath& b) const {
  if (b.grid->size() < out_grid_->size()) throw ConfigError("bridge input does not reach t1");
  const std::size_t m = out_grid_->size();
  for (std::size_t k = 0; k < m; ++k)
    if ((*b.grid)[k] != (*out_grid_)[k]) throw ConfigError("bridge input grid differs from the bridge grid");
  SamplePath head{out_grid_, std::vector<double>(b.values.begin(), b.values.begin() + static_cast<std::ptrdiff_t>(m)),
                  b.role};
  const Matrix ito = ito_integral(weights_, head);
  const Vector gap = ito.col(static_cast<Eigen::Index>(m - 1)) - spec_.y;
  SamplePath out{out_grid_, std::vector<double>(m), PathRole::bridge};
  for (std::size_t k = 0; k < m; ++k)
    out.values[k] = head.values[k] - psi_.col(static_cast<Eigen::Index>(k)).dot(gap);
  return out;
}

SamplePath generalized_bridge(const BridgeSpec& spec, const SamplePath& b) {
  return GeneralizedBridge(spec, b.grid).apply(b);
}

Matrix psd_factor(const Matrix& a) {
  if (a.rows() != a.cols()) throw ConfigError("covariance must be square");
  if (!a.isApprox(a.transpose(), 1e-12) && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-14)
    throw ConfigError("covariance must be symmetric");
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    if (a.row(i).cwiseAbs().maxCoeff() != 0.0) live.push_back(i);
  Matrix l = Matrix::Zero(a.rows(), a.cols());
  if (live.empty()) return l;
  const auto r = static_cast<Eigen::Index>(live.size());
  Matrix sub(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) sub(i, j) = a(live[static_cast<std::size_t>(i)], live[static_cast<std::size_t>(j)]);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sub);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) throw ConfigError("covariance is not positive semidefinite");
  const Matrix f = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  for (Eigen::Index i = 0; i < r; ++i) l.row(live[static_cast<std::size_t>(i)]).head(r) = f.row(i);
  return l;
}

SdeSolver::SdeSolver(SolutionSpec spec, GridPtr driver_grid, double horizon)
    : spec_(std::move(spec)), x0_(spec_.kernel, std::move(driver_grid), horizon, spec_.tolerance) {
  const auto n = static_cast<Eigen::Index>(spec_.kernel.order());
  if (const auto* fixed = std::get_if<FixedY>(&spec_.y)) {
    if (fixed->value.size() != n) throw ConfigError("fixed Y must have one entry per basis function");
    if (!fixed->value.allFinite()) throw ConfigError("fixed Y must be finite");
  } else if (std::holds_alternative<GaussianAlphaInfinityY>(spec_.y)) {
    if (!spec_.alpha_infinity)
      throw ConfigError("Gaussian Y with covariance alpha_inf requested before alpha_inf was computed");
    if (spec_.alpha_infinity->rows() != n) throw ConfigError("alpha_inf has the wrong size");
    factor_ = psd_factor(*spec_.alpha_infinity);
  } else if (!std::get<CustomY>(spec_.y).sample) {
    throw ConfigError("custom Y source has no sampler");
  }
  const auto& out = *x0_.output_grid();
  cumulative_.resize(n, static_cast<Eigen::Index>(out.size()));
  for (std::size_t k = 0; k < out.size(); ++k)
    cumulative_.col(static_cast<Eigen::Index>(k)) = basis_integral(spec_.kernel.basis(), out[k]);
}

SdeSolution SdeSolver::solve_with(const SamplePath& driver, const Vector& y) const {
  if (y.size() != cumulative_.rows()) throw ConfigError("Y has the wrong size");
  auto base = x0_.apply(driver);
  SdeSolution s;
  s.y = y;
  s.truncation_bound = base.truncation_bound;
  s.path = std::move(base.path);
  for (std::size_t k = 0; k < s.path.values.size(); ++k)
    s.path.values[k] += cumulative_.col(static_cast<Eigen::Index>(k)).dot(y);
  return s;
}

SdeSolution SdeSolver::solve(const SamplePath& driver, const RngSpec& rng, std::uint64_t index) const {
  const auto n = cumulative_.rows();
  Vector y;
  if (const auto* fixed = std::get_if<FixedY>(&spec_.y)) {
    y = fixed->value;
  } else if (std::holds_alternative<GaussianAlphaInfinityY>(spec_.y)) {
    auto gen = rng.stream(index, stream_tag::endpoint);
    std::normal_distribution<double> z;
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = z(gen);
    y = factor_ * w;
  } else {
    auto gen = rng.stream(index, stream_tag::endpoint);
    y = std::get<CustomY>(spec_.y).sample(gen);
    if (y.size() != n || !y.allFinite()) throw ConfigError("custom Y sampler returned an invalid vector");
  }
  return solve_with(driver, y);
}

SdeSolution sde_solution(const SolutionSpec& spec, const SamplePath& driver, double horizon, const RngSpec& rng,
                         std::uint64_t index) {
  return SdeSolver(spec, driver.grid, horizon).solve(driver, rng, index);
}

}  // namespace goursat
