#pragma once

#include <cmath>
#include <random>

#include "soliton_forge/almost_contact.hpp"
#include "soliton_forge/frame_geometry.hpp"

namespace test_support {

using soliton_forge::Matrix;
using soliton_forge::Vector;

inline std::mt19937& rng() {
  static std::mt19937 engine(20240611u);
  return engine;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Vector random_vector(int n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
  return v;
}

/// Random symmetric positive-definite matrix with eigenvalues in roughly [0.5, 3].
inline Matrix random_spd(int n) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = uniform(-0.5, 0.5);
  Matrix g = a * a.transpose() + 0.5 * Matrix::Identity(n, n);
  return 0.5 * (g + g.transpose());
}

/// Random g-unit vector in ker(eta).
inline Vector random_horizontal_unit(const soliton_forge::AlmostContactStructure& acs) {
  const Vector raw = random_vector(acs.frame.dim());
  const Vector h = raw - acs.eta.dot(raw) * acs.zeta;
  return h / acs.frame.norm(h);
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace test_support
