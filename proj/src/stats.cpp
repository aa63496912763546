#include "goursat/stats.h"

#include "goursat/errors.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace goursat {
namespace {

void require_samples(std::size_t n, std::size_t minimum, const char* what) {
  if (n < minimum) {
    std::ostringstream os;
    os << what << " needs at least " << minimum << " samples, got " << n;
    throw ConfigError(os.str());
  }
}

double mean_of(const std::vector<double>& xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

// Centered copies keep the leave-one-out sums well conditioned.
struct Centered {
  std::vector<double> x, y;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
};

Centered center(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ConfigError("paired samples differ in length");
  Centered c;
  const double mx = mean_of(xs), my = mean_of(ys);
  c.x.resize(xs.size());
  c.y.resize(ys.size());
  CompensatedSum sx, sy, sxx, syy, sxy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    c.x[i] = xs[i] - mx;
    c.y[i] = ys[i] - my;
    sx.add(c.x[i]);
    sy.add(c.y[i]);
    sxx.add(c.x[i] * c.x[i]);
    syy.add(c.y[i] * c.y[i]);
    sxy.add(c.x[i] * c.y[i]);
  }
  c.sx = sx.value();
  c.sy = sy.value();
  c.sxx = sxx.value();
  c.syy = syy.value();
  c.sxy = sxy.value();
  return c;
}

// loo holds the N leave-one-out statistics.
McEstimate jackknife(const std::vector<double>& loo, double full) {
  const double n = static_cast<double>(loo.size());
  const double m = mean_of(loo);
  CompensatedSum ss;
  for (double v : loo) ss.add((v - m) * (v - m));
  return McEstimate{full, std::sqrt((n - 1.0) / n * ss.value()), loo.size()};
}

}  // namespace

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v))
    c_ += (sum_ - t) + v;
  else
    c_ += (v - t) + sum_;
  sum_ = t;
}

McEstimate mean_estimate(const std::vector<double>& xs) {
  require_samples(xs.size(), 2, "mean_estimate");
  const double n = static_cast<double>(xs.size());
  const double m = mean_of(xs);
  CompensatedSum ss;
  for (double x : xs) ss.add((x - m) * (x - m));
  return McEstimate{m, std::sqrt(ss.value() / (n - 1.0) / n), xs.size()};
}

McEstimate covariance_estimate(const std::vector<double>& xs, const std::vector<double>& ys) {
  require_samples(xs.size(), 100, "covariance_estimate");
  const auto c = center(xs, ys);
  const double n = static_cast<double>(xs.size());
  const double full = (c.sxy - c.sx * c.sy / n) / (n - 1.0);
  std::vector<double> loo(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double sx = c.sx - c.x[i], sy = c.sy - c.y[i], sxy = c.sxy - c.x[i] * c.y[i];
    loo[i] = (sxy - sx * sy / (n - 1.0)) / (n - 2.0);
  }
  return jackknife(loo, full);
}

McEstimate covariance_estimate(const std::vector<SamplePath>& ensemble, double s, double t) {
  std::vector<double> xs, ys;
  xs.reserve(ensemble.size());
  ys.reserve(ensemble.size());
  for (const auto& p : ensemble) {
    xs.push_back(p.at(s));
    ys.push_back(p.at(t));
  }
  return covariance_estimate(xs, ys);
}

McEstimate correlation_estimate(const std::vector<double>& xs, const std::vector<double>& ys) {
  require_samples(xs.size(), 100, "correlation_estimate");
  const auto c = center(xs, ys);
  const double n = static_cast<double>(xs.size());
  auto corr = [](double sx, double sy, double sxx, double syy, double sxy, double k) {
    const double vx = sxx - sx * sx / k, vy = syy - sy * sy / k;
    if (!(vx > 0.0) || !(vy > 0.0)) return 0.0;
    return std::clamp((sxy - sx * sy / k) / std::sqrt(vx * vy), -1.0, 1.0);
  };
  const double full = corr(c.sx, c.sy, c.sxx, c.syy, c.sxy, n);
  std::vector<double> loo(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    loo[i] = corr(c.sx - c.x[i], c.sy - c.y[i], c.sxx - c.x[i] * c.x[i], c.syy - c.y[i] * c.y[i],
                  c.sxy - c.x[i] * c.y[i], n - 1.0);
  return jackknife(loo, full);
}

Band band(std::string label, const McEstimate& e, double target, double width) {
  Band b{std::move(label), e.mean, e.se, target, false};
  b.within = std::abs(e.mean - target) <= width * e.se;
  return b;
}

std::size_t allowed_violations(std::size_t count) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(count) * kBandFalsePositiveRate)) + 1;
}

BandSummary summarize(std::vector<Band> bands) {
  BandSummary s;
  s.bands = std::move(bands);
  for (const auto& b : s.bands)
    if (!b.within) ++s.violations;
  s.allowed = allowed_violations(s.bands.size());
  s.pass = s.violations <= s.allowed;
  return s;
}

BandSummary brownian_covariance_bands(const std::vector<std::vector<double>>& samples,
                                      const std::vector<double>& times) {
  std::vector<Band> bands;
  for (std::size_t a = 0; a < times.size(); ++a)
    for (std::size_t b = a; b < times.size(); ++b) {
      std::vector<double> xs, ys;
      xs.reserve(samples.size());
      ys.reserve(samples.size());
      for (const auto& row : samples) {
        xs.push_back(row[a]);
        ys.push_back(row[b]);
      }
      std::ostringstream label;
      label << "cov(" << times[a] << "," << times[b] << ")";
      bands.push_back(band(label.str(), covariance_estimate(xs, ys), std::min(times[a], times[b])));
    }
  return summarize(std::move(bands));
}

std::vector<double> independence_times(double t) {
  std::vector<double> out;
  for (int j = 1; j <= 8; ++j) out.push_back(t * j / 8.0);
  return out;
}

IndependenceReport independence_from_samples(const std::vector<Vector>& ito,
                                             const std::vector<std::vector<double>>& values,
                                             const std::vector<double>& times) {
  if (ito.empty() || ito.size() != values.size()) throw ConfigError("independence samples are mismatched");
  const auto n = ito.front().size();
  const auto k = static_cast<Eigen::Index>(times.size());
  IndependenceReport r;
  r.times = times;
  r.correlation.resize(n, k);
  r.se.resize(n, k);
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> xs;
    xs.reserve(ito.size());
    for (const auto& v : ito) xs.push_back(v(i));
    for (Eigen::Index j = 0; j < k; ++j) {
      std::vector<double> ys;
      ys.reserve(values.size());
      for (const auto& row : values) ys.push_back(row[static_cast<std::size_t>(j)]);
      const auto e = correlation_estimate(xs, ys);
      r.correlation(i, j) = e.mean;
      r.se(i, j) = e.se;
      const double z = e.se > 0.0 ? std::abs(e.mean) / e.se : (e.mean == 0.0 ? 0.0 : INFINITY);
      r.max_abs_z = std::max(r.max_abs_z, z);
      if (!(std::abs(e.mean) <= kBandWidth * e.se)) ++r.violations;
      ++count;
    }
  }
  r.allowed = allowed_violations(count);
  r.pass = r.violations <= r.allowed;
  return r;
}

IndependenceReport independence_test(const FunctionBasis& basis, const GoursatKernel& kernel,
                                     const std::vector<SamplePath>& ensemble, double t,
                                     IndependenceTarget target) {
  if (ensemble.empty()) throw ConfigError("independence_test needs paths");
  const auto grid = ensemble.front().grid;
  const VolterraTransform tr(kernel, grid);
  const Matrix w = increment_weights(basis, *grid);
  const auto times = independence_times(t);
  const auto k_t = grid->index_of(t);
  std::vector<std::size_t> idx;
  for (double s : times) idx.push_back(grid->index_of(s));
  std::vector<Vector> ito(ensemble.size());
  std::vector<std::vector<double>> values(ensemble.size());
  parallel_for(ensemble.size(), [&](std::size_t p) {
    const auto& b = ensemble[p];
    ito[p] = ito_integral(w, b).col(static_cast<Eigen::Index>(k_t));
    const SamplePath sigma = target == IndependenceTarget::transformed ? tr.apply(b).output : b;
    for (auto k : idx) values[p].push_back(sigma.values[k]);
  });
  return independence_from_samples(ito, values, times);
}

// --- progressive decomposition ----------------------------------------------

ProgressiveDecomposition::ProgressiveDecomposition(const FunctionBasis& basis, const GoursatKernel& kernel,
                                                   GridPtr grid, double t)
    : grid_(std::move(grid)), transform_(kernel, grid_) {
  if (basis.size() != kernel.order()) throw ConfigError("basis and kernel orders differ");
  const double horizon = grid_->horizon();
  if (!(t > 0.0 && t < horizon)) throw ConfigError("progressive decomposition needs 0 < t < T");
  t_index_ = grid_->index_of(t);
  horizon_index_ = grid_->index_of(horizon);
  times_ = independence_times(t);
  for (double s : times_) time_index_.push_back(grid_->index_of(s));
  m_t_ = gramian(basis, t);
  alpha_horizon_ = alpha(basis, horizon);
  weights_ = increment_weights(basis, *grid_);
  const auto& g = grid_->times();
  std::vector<double> mids;
  for (std::size_t k = t_index_ + 1; k <= horizon_index_; ++k) mids.push_back(0.5 * (g[k - 1] + g[k]));
  phi_mid_ = mids.empty() ? Matrix(static_cast<Eigen::Index>(kernel.order()), 0) : phi_on_nodes(kernel, mids);
}

ProgressiveSample ProgressiveDecomposition::sample(const SamplePath& b) const {
  const Matrix ito = ito_integral(weights_, b);
  const auto sigma = transform_.apply(b).output;
  const Vector y = alpha_horizon_ * ito.col(static_cast<Eigen::Index>(horizon_index_));
  Vector tail = Vector::Zero(y.size());
  for (std::size_t k = t_index_ + 1; k <= horizon_index_; ++k)
    tail += phi_mid_.col(static_cast<Eigen::Index>(k - t_index_ - 1)) * (sigma.values[k] - sigma.values[k - 1]);
  ProgressiveSample s;
  s.z = y - tail;
  s.residual = m_t_ * s.z - ito.col(static_cast<Eigen::Index>(t_index_));
  for (auto k : time_index_) s.sigma.push_back(sigma.values[k]);
  return s;
}

ProgressiveReport progressive_from_samples(const std::vector<ProgressiveSample>& samples,
                                           const std::vector<double>& times, double tolerance) {
  if (samples.empty()) throw ConfigError("progressive decomposition needs samples");
  ProgressiveReport r;
  const auto n = samples.front().z.size();
  r.rms_residual = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    CompensatedSum ss;
    for (const auto& s : samples) ss.add(s.residual(i) * s.residual(i));
    r.rms_residual(i) = std::sqrt(ss.value() / static_cast<double>(samples.size()));
  }
  r.max_rms = r.rms_residual.maxCoeff();
  r.tolerance = tolerance;
  std::vector<Vector> zs;
  std::vector<std::vector<double>> sig;
  for (const auto& s : samples) {
    zs.push_back(s.z);
    sig.push_back(s.sigma);
  }
  r.correlations = independence_from_samples(zs, sig, times);
  r.pass = r.correlations.pass && r.max_rms <= tolerance;
  return r;
}

ProgressiveReport progressive_decomposition_test(const FunctionBasis& basis, const GoursatKernel& kernel,
                                                 const std::vector<SamplePath>& ensemble, double t,
                                                 double horizon, double tolerance) {
  if (ensemble.empty()) throw ConfigError("progressive decomposition needs paths");
  const auto& grid = ensemble.front().grid;
  if (std::abs(grid->horizon() - horizon) > 1e-12 * horizon)
    throw ConfigError("ensemble grid horizon must equal T");
  const ProgressiveDecomposition pd(basis, kernel, grid, t);
  const auto samples =
      parallel_map<ProgressiveSample>(ensemble.size(), [&](std::size_t p) { return pd.sample(ensemble[p]); });
  return progressive_from_samples(samples, pd.times(), tolerance);
}

}  // namespace goursat
