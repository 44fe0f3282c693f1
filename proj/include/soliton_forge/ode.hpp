#pragma once

#include <functional>
#include <limits>

#include "soliton_forge/frame_geometry.hpp"

namespace soliton_forge {

using OdeRhs = std::function<Vector(double, const Vector&)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0: automatic
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 1'000'000;
};

/// One accepted step with the data needed for cubic Hermite dense output.
struct OdeStep {
  double t0 = 0.0, t1 = 0.0;
  Vector y0, y1, f0, f1;

  /// Cubic Hermite interpolant of the step at t in [t0, t1].
  Vector dense(double t) const;
  Vector dense_derivative(double t) const;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

/// Adaptive Dormand-Prince 5(4) from t0 towards t1 (t1 > t0). `on_step` is called after
/// every accepted step; returning false stops the integration after that step.
/// Throws SolverError when the step size underflows or max_steps is exceeded.
OdeStats integrate_dopri5(const OdeRhs& rhs, double t0, const Vector& y0, double t1,
                          const OdeOptions& options,
                          const std::function<bool(const OdeStep&)>& on_step);

}  // namespace soliton_forge
