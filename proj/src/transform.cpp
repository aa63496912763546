#include "goursat/transform.h"

#include "goursat/errors.h"

#include <cmath>
#include <sstream>

namespace goursat {
namespace {

void require_same_grid(const TimeGrid& a, const TimeGrid& b) {
  if (&a == &b) return;
  if (a.times() != b.times()) throw ConfigError("path grid differs from the grid the tables were built for");
}

}  // namespace

Matrix phi_on_nodes(const GoursatKernel& kernel, const std::vector<double>& times) {
  const auto n = static_cast<Eigen::Index>(kernel.order());
  Matrix out(n, static_cast<Eigen::Index>(times.size()));
  if (kernel.form() == KernelForm::generic) {
    const auto ms = gramians(kernel.basis(), times);
    for (std::size_t k = 0; k < times.size(); ++k)
      out.col(static_cast<Eigen::Index>(k)) = invert_gramian(ms[k], times[k]) * kernel.basis().values(times[k]);
  } else {
    for (std::size_t k = 0; k < times.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = kernel.left_factor(times[k]);
  }
  if (!out.allFinite()) throw NumericalError("phi is not finite on the grid");
  return out;
}

// --- Volterra transform ------------------------------------------------------

VolterraTransform::VolterraTransform(const GoursatKernel& kernel, GridPtr grid) : grid_(std::move(grid)) {
  weights_ = increment_weights(kernel.basis(), *grid_);
  phi_ = phi_on_nodes(kernel, grid_->times());
}

TransformReport VolterraTransform::apply(const SamplePath& path) const {
  require_same_grid(*grid_, *path.grid);
  const Matrix ito = ito_integral(weights_, path);
  const auto& t = grid_->times();
  const std::size_t m = t.size();
  std::vector<double> g(m);
  for (std::size_t k = 0; k < m; ++k) {
    g[k] = phi_.col(static_cast<Eigen::Index>(k)).dot(ito.col(static_cast<Eigen::Index>(k)));
    if (!std::isfinite(g[k])) {
      std::ostringstream os;
      os << "drift integrand is not finite at t=" << t[k];
      throw NumericalError(os.str());
    }
  }
  TransformReport r;
  r.output = SamplePath{path.grid, std::vector<double>(m), PathRole::transformed};
  // Trapezoid in x = log u on u g(u): exact for g ~ c/u with J linear in log u,
  // which is how phi behaves near the origin.
  std::vector<double> ug(m);
  for (std::size_t k = 0; k < m; ++k) ug[k] = t[k] * g[k];
  double drift = 0.0, coarse = 0.0;
  r.output.values[0] = path.values[0];
  for (std::size_t k = 1; k < m; ++k) {
    drift += 0.5 * (ug[k - 1] + ug[k]) * std::log(t[k] / t[k - 1]);
    r.output.values[k] = path.values[k] - drift;
    if (k % 2 == 0) {
      coarse += 0.5 * (ug[k - 2] + ug[k]) * std::log(t[k] / t[k - 2]);
      r.convergence_estimate = std::max(r.convergence_estimate, std::abs(drift - coarse));
    }
  }
  r.eps0 = t[0];
  r.eps0_contribution = g[0] * (2.0 / 3.0) * t[0];
  return r;
}

TransformReport volterra_transform(const GoursatKernel& kernel, const SamplePath& path) {
  return VolterraTransform(kernel, path.grid).apply(path);
}

SamplePath iterate_transform(const GoursatKernel& kernel, const SamplePath& path, unsigned m) {
  if (m == 0) return path;
  const VolterraTransform tr(kernel, path.grid);
  SamplePath x = path;
  for (unsigned i = 0; i < m; ++i) x = tr.apply(x).output;
  return x;
}

// --- Laguerre closed form ----------------------------------------------------

double laguerre(unsigned n, double x) {
  if (n == 0) return 1.0;
  double prev = 1.0, cur = 1.0 - x;
  for (unsigned k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

SamplePath laguerre_direct(unsigned n, const SamplePath& path) {
  path.validate();
  const auto& t = path.grid->times();
  const std::size_t m = t.size();
  std::vector<double> s(m), dx(m);
  s[0] = t[0];
  dx[0] = path.values[0];
  for (std::size_t i = 1; i < m; ++i) {
    s[i] = std::sqrt(t[i - 1] * t[i]);
    dx[i] = path.values[i] - path.values[i - 1];
  }
  SamplePath out{path.grid, std::vector<double>(m), PathRole::transformed};
  for (std::size_t k = 0; k < m; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i <= k; ++i) sum += laguerre(n, std::log(t[k] / s[i])) * dx[i];
    out.values[k] = sum;
  }
  return out;
}

// --- particular solution X0 --------------------------------------------------

XZero::XZero(const GoursatKernel& kernel, GridPtr driver_grid, double horizon, double tolerance)
    : grid_(std::move(driver_grid)) {
  const double t_max = grid_->end();
  if (!(t_max >= 10.0 * horizon * (1.0 - 1e-12))) {
    std::ostringstream os;
    os << "x_zero needs T_max >= 10 T; grid ends at " << t_max << " for T=" << horizon;
    throw ConfigError(os.str());
  }
  out_grid_ = grid_->prefix(horizon);
  bound_ = kernel.phi_tail(t_max).trace();
  if (!(bound_ <= tolerance)) {
    std::ostringstream os;
    os << "truncation bound " << bound_ << " at T_max=" << t_max << " exceeds " << tolerance
       << "; extend the driver grid to a larger T_max";
    throw TruncationError(os.str(), bound_);
  }
  const auto& t = grid_->times();
  std::vector<double> points(t.size());
  points[0] = 0.5 * t[0];
  for (std::size_t k = 1; k < t.size(); ++k) points[k] = 0.5 * (t[k - 1] + t[k]);
  phi_weights_ = phi_on_nodes(kernel, points);
  // Drift on (0, eps0) by parts: F(eps0)^* (J_{T_max} - J_{eps0}) + int_0^{eps0} F^* phi dW,
  // with F = int_0 f and F^* phi (nearly constant there) taken at eps0 / 2.
  origin_integral_ = basis_integral(kernel.basis(), t[0]);
  origin_weight_ = basis_integral(kernel.basis(), points[0]).dot(phi_weights_.col(0));
  const std::size_t m_out = out_grid_->size();
  f_nodes_.resize(static_cast<Eigen::Index>(kernel.order()), static_cast<Eigen::Index>(m_out));
  for (std::size_t k = 0; k < m_out; ++k) f_nodes_.col(static_cast<Eigen::Index>(k)) = kernel.basis().values(t[k]);
}

XZeroResult XZero::apply(const SamplePath& wiener) const {
  require_same_grid(*grid_, *wiener.grid);
  const Matrix j = ito_integral(phi_weights_, wiener);
  const Vector g = j.col(j.cols() - 1);
  const auto& t = grid_->times();
  const std::size_t m_out = out_grid_->size();
  XZeroResult r;
  r.truncation_bound = bound_;
  r.t_max = grid_->end();
  r.path = SamplePath{out_grid_, std::vector<double>(m_out), PathRole::sde_solution};
  auto h = [&](std::size_t k) {
    return (g - j.col(static_cast<Eigen::Index>(k))).dot(f_nodes_.col(static_cast<Eigen::Index>(k)));
  };
  double drift = 0.0;
  double prev = h(0);
  r.path.values[0] = wiener.values[0] * (1.0 - origin_weight_) - origin_integral_.dot(g - j.col(0));
  for (std::size_t k = 1; k < m_out; ++k) {
    const double cur = h(k);
    drift += 0.5 * (prev + cur) * (t[k] - t[k - 1]);
    r.path.values[k] = r.path.values[0] + wiener.values[k] - wiener.values[0] - drift;
    prev = cur;
  }
  r.path.validate();
  return r;
}

XZeroResult x_zero(const GoursatKernel& kernel, const SamplePath& wiener, double horizon, double tolerance) {
  return XZero(kernel, wiener.grid, horizon, tolerance).apply(wiener);
}

// --- recovery of Y -----------------------------------------------------------

YRecovery::YRecovery(const FunctionBasis& basis, GridPtr grid, double horizon)
    : grid_(std::move(grid)), horizon_(horizon) {
  weights_ = increment_weights(basis, *grid_);
  alphas_.emplace_back(grid_->index_of(horizon), alpha(basis, horizon));
  for (double frac : {0.5, 0.25}) {
    try {
      const auto k = grid_->index_of(frac * horizon);
      alphas_.emplace_back(k, alpha(basis, (*grid_)[k]));
    } catch (const ConfigError&) {
      alphas_.emplace_back(static_cast<std::size_t>(-1), Matrix());
    }
  }
}

RecoveredY YRecovery::apply(const SamplePath& x) const {
  require_same_grid(*grid_, *x.grid);
  const Matrix ito = ito_integral(weights_, x);
  RecoveredY r;
  r.horizon = horizon_;
  auto at = [&](std::size_t i) -> std::optional<Vector> {
    const auto& [k, a] = alphas_[i];
    if (k == static_cast<std::size_t>(-1)) return std::nullopt;
    return Vector(a * ito.col(static_cast<Eigen::Index>(k)));
  };
  r.value = *at(0);
  r.at_half = at(1);
  r.at_quarter = at(2);
  return r;
}

RecoveredY recover_y(const FunctionBasis& basis, const SamplePath& x, double horizon) {
  return YRecovery(basis, x.grid, horizon).apply(x);
}

}  // namespace goursat
