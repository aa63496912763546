#pragma once

#include "goursat/basis.h"
#include "goursat/paths.h"
#include "goursat/stats.h"

#include <random>
#include <string>
#include <vector>

namespace goursat {

// Law nu of the endpoint vector Y: finitely supported or Gaussian.
struct EndpointLaw {
  enum class Kind { discrete, gaussian } kind = Kind::discrete;
  std::vector<Vector> points;
  std::vector<double> weights;
  Vector mean;
  Matrix cov;

  static EndpointLaw point_mass(Vector y);
  static EndpointLaw discrete(std::vector<Vector> points, std::vector<double> weights);
  static EndpointLaw gaussian(Vector mean, Matrix cov);

  std::size_t dim() const;
  void validate() const;
  Vector sample(std::mt19937_64& gen) const;
};

// `point:<y1,y2,..>` | `discrete:<file>` (rows: weight y1 y2 ..) |
// `gauss:<file>` (covariance rows, optional `mean y1 y2 ..` row).
EndpointLaw parse_law(const std::string& spec, const std::string& base_dir = ".");

// log h(t, x) with m = m_t: log sum_k w_k exp(y_k^* x - y_k^* m y_k / 2) for discrete
// laws; for N(mu, C), with x' = x - m mu,
//   mu^* x - mu^* m mu / 2 - log det(I + m C) / 2 + x'^* C (I + m C)^{-1} x' / 2,
// which stays valid for singular C.
double log_harmonic_h(const Matrix& m, const EndpointLaw& law, const Vector& x);
double harmonic_h(const FunctionBasis& basis, const EndpointLaw& law, double t, const Vector& x);

// Average of exp(y^* x - y^* m_t y / 2) over draws y ~ nu; the oracle for h.
McEstimate harmonic_h_over_law(const FunctionBasis& basis, const EndpointLaw& law, double t, const Vector& x,
                               std::size_t draws, const RngSpec& rng);

// Monte Carlo E[h(t, I_t(B))]; requires alpha_inf == 0 for the basis.
McEstimate martingale_check(const FunctionBasis& basis, const EndpointLaw& law, double t, std::size_t paths,
                            const RngSpec& rng, const GridParams& grid);
McEstimate martingale_check(const FunctionBasis& basis, const EndpointLaw& law, double t, std::size_t paths,
                            const RngSpec& rng);

struct TiltedPath {
  SamplePath path;
  Vector y;
};

// B + Y^* int_0^. f with Y ~ nu drawn independently of B.
class TiltedSampler {
 public:
  TiltedSampler(const FunctionBasis& basis, EndpointLaw law, GridPtr grid);
  TiltedPath sample(const RngSpec& rng, std::uint64_t index) const;

 private:
  EndpointLaw law_;
  GridPtr grid_;
  Matrix cumulative_;
};

TiltedPath tilted_sampler(const FunctionBasis& basis, const EndpointLaw& law, const GridPtr& grid,
                          const RngSpec& rng, std::uint64_t index);

}  // namespace goursat
