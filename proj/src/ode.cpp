#include "soliton_forge/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "soliton_forge/errors.hpp"

namespace soliton_forge {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// error weights b - b*
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const OdeOptions& o) {
  double sum = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    const double scale = o.atol + o.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    sum += (err(i) / scale) * (err(i) / scale);
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

}  // namespace

Vector OdeStep::dense(double t) const {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

Vector OdeStep::dense_derivative(double t) const {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double d00 = 6 * s * (s - 1) / h, d10 = (1 - s) * (1 - 3 * s);
  const double d01 = -d00, d11 = s * (3 * s - 2);
  return d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1;
}

OdeStats integrate_dopri5(const OdeRhs& rhs, double t0, const Vector& y0, double t1,
                          const OdeOptions& options,
                          const std::function<bool(const OdeStep&)>& on_step) {
  if (!(t1 > t0)) throw InvalidInput("integrate_dopri5: need t1 > t0");
  OdeStats stats;
  double t = t0;
  Vector y = y0;
  Vector k1 = rhs(t, y);
  ++stats.evaluations;

  const double span = t1 - t0;
  double h = options.initial_step > 0.0 ? options.initial_step : std::min(span, options.max_step) * 1e-3;
  h = std::min(h, options.max_step);
  double previous_error = 1e-4;

  while (t < t1) {
    if (stats.accepted + stats.rejected >= options.max_steps) {
      throw SolverError("integrate_dopri5: maximum number of steps exceeded");
    }
    bool last = false;
    if (t + h >= t1 || t1 - (t + h) < 1e-12 * span) {
      h = t1 - t;
      last = true;
    }
    if (h <= 1e-15 * std::max(1.0, std::abs(t))) {
      throw SolverError("integrate_dopri5: step size underflow at t = " + std::to_string(t));
    }

    const Vector k2 = rhs(t + c2 * h, y + h * (a21 * k1));
    const Vector k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Vector k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = rhs(t + h, y_new);
    stats.evaluations += 6;

    const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double norm = error_norm(err, y, y_new, options);
    if (!std::isfinite(norm)) {
      ++stats.rejected;
      h *= 0.25;
      continue;
    }

    if (norm <= 1.0) {
      OdeStep step{t, last ? t1 : t + h, y, y_new, k1, k7};
      t = step.t1;
      y = y_new;
      k1 = k7;
      ++stats.accepted;
      if (!on_step(step)) break;
      // PI step-size controller.
      const double factor = 0.9 * std::pow(std::max(norm, 1e-10), -0.7 / 5.0) *
                            std::pow(previous_error, 0.4 / 5.0);
      previous_error = std::max(norm, 1e-4);
      h = std::min(h * std::clamp(factor, 0.2, 5.0), options.max_step);
    } else {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(norm, -1.0 / 5.0));
    }
  }
  return stats;
}

}  // namespace soliton_forge
