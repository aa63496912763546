#pragma once

#include "goursat/basis.h"
#include "goursat/stats.h"

#include <doctest.h>

#include <cmath>

namespace goursat::test {

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// |estimate - target| <= 4 SE.
inline bool within_band(const McEstimate& e, double target) { return std::abs(e.mean - target) <= 4.0 * e.se; }

}  // namespace goursat::test
