#pragma once

#include "goursat/kernel.h"
#include "goursat/paths.h"
#include "goursat/transform.h"

#include <string>
#include <vector>

namespace goursat {

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

// Sample mean with SE = sd / sqrt(N); N >= 2.
McEstimate mean_estimate(const std::vector<double>& xs);
// Unbiased sample covariance with a leave-one-out jackknife SE; N >= 100.
McEstimate covariance_estimate(const std::vector<double>& xs, const std::vector<double>& ys);
McEstimate covariance_estimate(const std::vector<SamplePath>& ensemble, double s, double t);
// Pearson correlation with a jackknife SE; N >= 100.
McEstimate correlation_estimate(const std::vector<double>& xs, const std::vector<double>& ys);

// Two-sided 4 SE band: about 6.3e-5 false positives per Gaussian check.
constexpr double kBandWidth = 4.0;
constexpr double kBandFalsePositiveRate = 6.3e-5;

struct Band {
  std::string label;
  double estimate = 0.0;
  double se = 0.0;
  double target = 0.0;
  bool within = false;
};
Band band(std::string label, const McEstimate& e, double target, double width = kBandWidth);

// Passes when the number of violations is at most floor(count * 6.3e-5) + 1.
struct BandSummary {
  std::vector<Band> bands;
  std::size_t violations = 0;
  std::size_t allowed = 0;
  bool pass = false;
};
std::size_t allowed_violations(std::size_t count);
BandSummary summarize(std::vector<Band> bands);

// Empirical covariance grid cov(X_s, X_t) against s ^ t from per-path samples:
// samples[p][j] is path p at times[j].
BandSummary brownian_covariance_bands(const std::vector<std::vector<double>>& samples,
                                      const std::vector<double>& times);

struct IndependenceReport {
  std::vector<double> times;
  Matrix correlation;  // rows: components of I_t, columns: times
  Matrix se;
  std::size_t violations = 0;
  std::size_t allowed = 0;
  bool pass = false;
  double max_abs_z = 0.0;  // largest |corr| / SE
};

// ito[p] is I_t on path p, values[p][j] the compared process at times[j].
IndependenceReport independence_from_samples(const std::vector<Vector>& ito,
                                             const std::vector<std::vector<double>>& values,
                                             const std::vector<double>& times);

// The eight times t j / 8, j = 1..8.
std::vector<double> independence_times(double t);

enum class IndependenceTarget { transformed, raw };
// Correlations of I_t components with Sigma(B) (or B itself for the negative
// control) at eight times in (0, t].
IndependenceReport independence_test(const FunctionBasis& basis, const GoursatKernel& kernel,
                                     const std::vector<SamplePath>& ensemble, double t,
                                     IndependenceTarget target = IndependenceTarget::transformed);

struct ProgressiveReport {
  IndependenceReport correlations;  // Y - int_t^T phi dSigma(B) against Sigma(B) on (0, t]
  Vector rms_residual;              // RMS over paths of m_t (Y - int_t^T phi dSigma) - I_t
  double max_rms = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Per-path pieces of the progressive decomposition check for one Brownian path on
// a grid whose horizon is T: Y = alpha_T I_T(B), Z = Y - int_t^T phi dSigma(B)
// (phi at increment midpoints) and residual = m_t Z - I_t(B).
struct ProgressiveSample {
  Vector residual;
  Vector z;
  std::vector<double> sigma;
};

class ProgressiveDecomposition {
 public:
  ProgressiveDecomposition(const FunctionBasis& basis, const GoursatKernel& kernel, GridPtr grid, double t);
  ProgressiveSample sample(const SamplePath& b) const;
  const std::vector<double>& times() const { return times_; }

 private:
  GridPtr grid_;
  VolterraTransform transform_;
  std::size_t t_index_ = 0;
  std::size_t horizon_index_ = 0;
  std::vector<double> times_;
  std::vector<std::size_t> time_index_;
  Matrix m_t_;
  Matrix alpha_horizon_;
  Matrix weights_;
  Matrix phi_mid_;
};

ProgressiveReport progressive_from_samples(const std::vector<ProgressiveSample>& samples,
                                           const std::vector<double>& times, double tolerance);
ProgressiveReport progressive_decomposition_test(const FunctionBasis& basis, const GoursatKernel& kernel,
                                                 const std::vector<SamplePath>& ensemble, double t,
                                                 double horizon, double tolerance);

}  // namespace goursat
