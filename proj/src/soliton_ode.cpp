#include "soliton_forge/soliton_ode.hpp"

#include <algorithm>
#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "soliton_forge/errors.hpp"
#include "soliton_forge/model_zoo.hpp"
#include "soliton_forge/parallel.hpp"

namespace soliton_forge {
namespace {

double line_tolerance(const SolitonProblem& p) {
  return 1e-14 * std::max({1.0, std::abs(p.A), std::abs(p.s_min)});
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InvalidInput(std::string("soliton problem: ") + name + " is not finite");
}

using Quintic = boost::math::interpolators::quintic_hermite<std::vector<double>>;
using Gauss = boost::math::quadrature::gauss<double, 20>;

// Shared state of a Calabi tube: alpha(s) interpolant and the t(s) map.
class CalabiTube {
 public:
  CalabiTube(const AlphaProfile& profile, const SolitonProblem& p)
      : s_(profile.grid), problem_(p), singular_(profile.singular_start) {
    zero_left_ = profile.alpha.front() == 0.0;
    zero_right_ = profile.alpha.back() == 0.0;
    alpha_ = std::make_unique<Quintic>(std::vector<double>(profile.grid),
                                       std::vector<double>(profile.alpha),
                                       std::vector<double>(profile.alpha_prime),
                                       std::vector<double>(profile.alpha_second));
    t_.assign(s_.size(), 0.0);
    for (std::size_t j = 0; j + 1 < s_.size(); ++j) t_[j + 1] = t_[j] + cell_length(j);
  }

  double t_max() const { return t_.back(); }

  double u(double s) const {
    return singular_ ? 2.0 * (s - s_.front()) : 2.0 * s + problem_.A;
  }

  // alpha from the interpolant; its derivatives from the ODE itself, which keeps the jet
  // consistent with the equation. Right next to a singular start that formula cancels, and the
  // interpolant (built on exact closed-form nodes there) is used instead.
  Jet alpha(double s) const {
    const double a = std::max(0.0, (*alpha_)(s));
    const double u_s = u(s);
    if (singular_ && u_s < 2e-4) return {a, alpha_->prime(s), alpha_->double_prime(s)};
    const SolitonProblem& p = problem_;
    const double d1 = p.k - p.lambda * u_s - 2.0 * p.n * a / u_s + p.B * a;
    const double d2 = -2.0 * p.lambda - 2.0 * p.n * (d1 * u_s - 2.0 * a) / (u_s * u_s) + p.B * d1;
    return {a, d1, d2};
  }

  double t_of_s(double s) const {
    if (s < s_.front() || s > s_.back()) {
      throw DomainError("Calabi tube evaluated outside s in [" + std::to_string(s_.front()) + ", " +
                        std::to_string(s_.back()) + "]");
    }
    const std::size_t j = locate_cell(s_, s);
    if (s == s_[j]) return t_[j];
    if (s == s_[j + 1]) return t_[j + 1];
    if (left_singular_cell(j)) return t_[j] + left_integral(j, std::sqrt(s - s_[j]));
    if (right_singular_cell(j)) return t_[j + 1] - right_integral(j, std::sqrt(s_[j + 1] - s));
    return t_[j] + plain_integral(s_[j], s);
  }

  double s_of_t(double t) const {
    const double slack = 1e-12 * std::max(1.0, t_.back());
    if (t < -slack || t > t_.back() + slack) {
      throw DomainError("Calabi tube evaluated outside t in [0, " + std::to_string(t_.back()) + "]");
    }
    t = std::clamp(t, 0.0, t_.back());
    const std::size_t j = locate_cell(t_, t);
    if (t == t_[j]) return s_[j];
    if (t == t_[j + 1]) return s_[j + 1];
    const double width = s_[j + 1] - s_[j];
    std::uintmax_t iterations = 200;
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);

    if (left_singular_cell(j)) {
      auto g = [&](double w) { return t_[j] + left_integral(j, w) - t; };
      const auto r = boost::math::tools::toms748_solve(g, 0.0, std::sqrt(width), tol, iterations);
      const double w = 0.5 * (r.first + r.second);
      return s_[j] + w * w;
    }
    if (right_singular_cell(j)) {
      auto g = [&](double w) { return t_[j + 1] - right_integral(j, w) - t; };
      const auto r = boost::math::tools::toms748_solve(g, 0.0, std::sqrt(width), tol, iterations);
      const double w = 0.5 * (r.first + r.second);
      return s_[j + 1] - w * w;
    }
    auto g = [&](double s) { return t_[j] + plain_integral(s_[j], s) - t; };
    const auto r = boost::math::tools::toms748_solve(g, s_[j], s_[j + 1], tol, iterations);
    return 0.5 * (r.first + r.second);
  }

 private:
  bool left_singular_cell(std::size_t j) const { return zero_left_ && j == 0; }
  bool right_singular_cell(std::size_t j) const { return zero_right_ && j + 2 == s_.size(); }

  double inv_sqrt_alpha(double s) const { return 1.0 / std::sqrt((*alpha_)(s)); }

  double plain_integral(double a, double b) const {
    return Gauss::integrate([&](double s) { return inv_sqrt_alpha(s); }, a, b);
  }
  // int_{s_j}^{s_j + w^2} ds / sqrt(alpha) with s = s_j + v^2.
  double left_integral(std::size_t j, double w) const {
    if (w == 0.0) return 0.0;
    return Gauss::integrate(
        [&](double v) { return 2.0 * v / std::sqrt((*alpha_)(s_[j] + v * v)); }, 0.0, w);
  }
  // int_{s_{j+1} - w^2}^{s_{j+1}} ds / sqrt(alpha) with s = s_{j+1} - v^2.
  double right_integral(std::size_t j, double w) const {
    if (w == 0.0) return 0.0;
    return Gauss::integrate(
        [&](double v) { return 2.0 * v / std::sqrt((*alpha_)(s_[j + 1] - v * v)); }, 0.0, w);
  }
  double cell_length(std::size_t j) const {
    const double width = s_[j + 1] - s_[j];
    if (left_singular_cell(j)) return left_integral(j, std::sqrt(width));
    if (right_singular_cell(j)) return right_integral(j, std::sqrt(width));
    return plain_integral(s_[j], s_[j + 1]);
  }

  std::vector<double> s_;
  std::vector<double> t_;
  SolitonProblem problem_;
  bool singular_ = false;
  bool zero_left_ = false;
  bool zero_right_ = false;
  std::unique_ptr<Quintic> alpha_;
};

// Orthonormal basis of g_t: zeta* first, then a horizontal basis.
Matrix adapted_basis(const AlmostContactStructure& deformed) {
  const Matrix h = horizontal_basis(deformed);
  Matrix basis(deformed.frame.dim(), h.cols() + 1);
  basis.col(0) = deformed.zeta;
  basis.rightCols(h.cols()) = h;
  return basis;
}

AlmostContactStructure slice_structure(const WarpedProductMetric& w, double H, double F) {
  return hf_deform(w.base, {1, H, F});
}

double neville_at_zero(const std::vector<double>& x, std::vector<double> y, double* error) {
  const std::size_t n = x.size();
  double previous = y[n - 1];
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = n - 1; i >= level; --i) {
      y[i] = (x[i - level] * y[i] - x[i] * y[i - 1]) / (x[i - level] - x[i]);
      if (i == level) break;
    }
    if (level + 1 == n) *error = std::abs(y[n - 1] - previous);
    previous = y[n - 1];
  }
  return y[n - 1];
}

}  // namespace

void validate_problem(const SolitonProblem& p) {
  require_finite(p.lambda, "lambda");
  require_finite(p.k, "k");
  require_finite(p.A, "A");
  require_finite(p.B, "B");
  require_finite(p.C, "C");
  require_finite(p.s_min, "s_min");
  require_finite(p.s_max, "s_max");
  if (p.n < 1) throw InvalidInput("soliton problem: n must be a positive integer");
  if (!(p.s_max > p.s_min)) throw InvalidInput("soliton problem: s_max must exceed s_min");
  if (2.0 * p.s_min + p.A < -line_tolerance(p)) {
    throw InvalidInput("soliton problem: 2s + A must be positive on the open interval (s_min, s_max)");
  }
}

bool singular_start(const SolitonProblem& p) {
  return std::abs(2.0 * p.s_min + p.A) <= line_tolerance(p);
}

double alpha_ode_rhs(double s, double alpha, const SolitonProblem& p) {
  const double u = 2.0 * s + p.A;
  if (!(u > 0.0)) throw DomainError("alpha ODE evaluated where 2s + A <= 0");
  return p.k - p.lambda * u - 2.0 * p.n * alpha / u + p.B * alpha;
}

double alpha_ode_second(double s, double alpha, const SolitonProblem& p) {
  const double u = 2.0 * s + p.A;
  if (!(u > 0.0)) throw DomainError("alpha ODE evaluated where 2s + A <= 0");
  const double d1 = alpha_ode_rhs(s, alpha, p);
  return -2.0 * p.lambda - 2.0 * p.n * (d1 * u - 2.0 * alpha) / (u * u) + p.B * d1;
}

double closed_form_alpha(double s0, double alpha0, double s1, const SolitonProblem& p) {
  const double u0 = 2.0 * s0 + p.A, u1 = 2.0 * s1 + p.A;
  if (!(u1 > 0.0) || u0 < -line_tolerance(p)) {
    throw DomainError("closed form evaluated where 2s + A <= 0");
  }
  // mu(sigma) / mu(s1) = (u(sigma) / u1)^n exp(B (s1 - sigma))
  auto ratio = [&](double sigma) {
    return std::pow((2.0 * sigma + p.A) / u1, p.n) * std::exp(p.B * (s1 - sigma));
  };
  auto integrand = [&](double sigma) { return ratio(sigma) * (p.k - p.lambda * (2.0 * sigma + p.A)); };
  double error = 0.0, l1 = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, s0, s1, 4, 1e-12, &error, &l1);
  // The Kronrod error estimate is pessimistic on short intervals; cross-check against an
  // independent Gauss rule instead.
  const double check = boost::math::quadrature::gauss<double, 30>::integrate(integrand, s0, s1);
  if (!std::isfinite(integral) || std::abs(integral - check) > 1e-10 * l1 + 1e-15) {
    throw SolverError("integrating-factor quadrature did not converge");
  }
  const double carried = u0 > 0.0 ? alpha0 * ratio(s0) : 0.0;
  return carried + integral;
}

AlphaProfile solve_alpha(const SolitonProblem& p, double alpha_init, const SolveOptions& options) {
  validate_problem(p);
  require_finite(alpha_init, "alpha_init");
  AlphaProfile profile;
  profile.singular_start = singular_start(p);
  const double a1 = p.k / (p.n + 1.0);

  if (alpha_init < 0.0) throw EmptyProfile("alpha_init < 0: alpha is not positive at s_min");
  if (profile.singular_start) {
    if (alpha_init != 0.0) {
      throw InvalidInput("on the singular line 2s + A = 0 the only regular start is alpha = 0");
    }
    if (a1 <= 0.0) {
      throw EmptyProfile("alpha'(s_min) = k / (n + 1) <= 0: alpha becomes negative immediately");
    }
  } else if (alpha_init == 0.0 && alpha_ode_rhs(p.s_min, 0.0, p) <= 0.0) {
    throw EmptyProfile("alpha(s_min) = 0 and alpha'(s_min) <= 0: alpha becomes negative immediately");
  }

  auto push = [&](double s, double a, double closed) {
    profile.grid.push_back(s);
    profile.alpha.push_back(a);
    profile.closed_form.push_back(closed);
    if (profile.singular_start && profile.grid.size() == 1) {
      profile.alpha_prime.push_back(a1);
      profile.alpha_second.push_back(2.0 * (p.B * a1 - 2.0 * p.lambda) / (p.n + 2.0));
    } else {
      profile.alpha_prime.push_back(alpha_ode_rhs(s, a, p));
      profile.alpha_second.push_back(alpha_ode_second(s, a, p));
    }
  };

  push(p.s_min, alpha_init, alpha_init);

  // Closed form near the singular line, where explicit stepping loses accuracy.
  double s_start = p.s_min;
  double a_start = alpha_init;
  const double distance = 0.5 * (2.0 * p.s_min + p.A);
  if (distance < options.singular_band) {
    const double s_band = std::min(p.s_max, p.s_min + (options.singular_band - distance));
    constexpr int band_nodes = 8;
    for (int i = 1; i <= band_nodes; ++i) {
      const double s = p.s_min + (s_band - p.s_min) * i / band_nodes;
      const double a = closed_form_alpha(p.s_min, alpha_init, s, p);
      if (!(a > 0.0)) throw EmptyProfile("alpha reaches 0 inside the singular band at s = " + std::to_string(s));
      push(s, a, a);
    }
    s_start = s_band;
    a_start = profile.alpha.back();
  }

  if (s_start < p.s_max) {
    OdeOptions ode;
    ode.rtol = options.rtol;
    ode.atol = options.atol;
    ode.max_step = (p.s_max - p.s_min) / std::max(1, options.min_nodes);
    auto rhs = [&](double s, const Vector& y) {
      Vector out(1);
      out(0) = alpha_ode_rhs(s, y(0), p);
      return out;
    };
    Vector y0(1);
    y0(0) = a_start;
    profile.stats = integrate_dopri5(rhs, s_start, y0, p.s_max, ode, [&](const OdeStep& step) {
      const double a = step.y1(0);
      if (a > 0.0) {
        const double closed = closed_form_alpha(profile.grid.back(), profile.closed_form.back(), step.t1, p);
        push(step.t1, a, closed);
        return true;
      }
      // Bisection on the dense output for the first alpha = 0.
      double lo = step.t0, hi = step.t1;
      while (hi - lo > std::min(options.crossing_width, 1e-14 * std::max(1.0, std::abs(hi)))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (step.dense(mid)(0) > 0.0 ? lo : hi) = mid;
      }
      profile.zero_crossing = ZeroCrossing{lo, hi};
      const double s_end = 0.5 * (lo + hi);
      if (s_end - p.s_min <= 1e-12 * std::max(1.0, p.s_max - p.s_min)) {
        throw EmptyProfile("alpha reaches 0 before any integration progress");
      }
      if (s_end > profile.grid.back()) {
        const double closed = closed_form_alpha(profile.grid.back(), profile.closed_form.back(), s_end, p);
        push(s_end, 0.0, closed);
      } else {
        profile.alpha.back() = 0.0;
      }
      return false;
    });
  }

  // A zero landing on s_max within the absolute tolerance is the endpoint of the profile.
  if (!profile.zero_crossing && profile.grid.size() > 1 && std::abs(profile.alpha.back()) <= 10.0 * options.atol) {
    profile.alpha.back() = 0.0;
  }
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    profile.closed_form_gap =
        std::max(profile.closed_form_gap, std::abs(profile.alpha[i] - profile.closed_form[i]));
  }
  if (profile.grid.size() < 2) throw EmptyProfile("alpha profile has no interior");
  return profile;
}

double profile_self_consistency(const WarpedProductMetric& w, int samples, double h) {
  double worst = 0.0;
  const std::vector<double> grid = interior_grid(w.t_min + 2 * h, w.t_max - 2 * h, samples);
  for (double t : grid) {
    for (const ProfileFn* fn : {&w.H, &w.F, &w.f}) {
      const Jet c = (*fn)(t), l = (*fn)(t - h), r = (*fn)(t + h);
      const Jet ll = (*fn)(t - 2 * h), rr = (*fn)(t + 2 * h);
      const double d1 = (ll.value - 8 * l.value + 8 * r.value - rr.value) / (12 * h);
      const double d2 = (-ll.d1 + 8 * l.d1 - 8 * r.d1 + rr.d1) / (-12 * h);
      worst = std::max({worst, std::abs(d1 - c.d1), std::abs(d2 - c.d2)});
    }
  }
  return worst;
}

WarpedProductMetric calabi_to_tube(const AlphaProfile& profile, const SolitonProblem& p) {
  validate_problem(p);
  const std::size_t n = profile.grid.size();
  if (n < 2) throw InvalidInput("calabi_to_tube: profile needs at least two nodes");
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(profile.alpha[i] > 0.0)) {
      throw PreconditionError("calabi_to_tube: alpha touches 0 in the interior (degenerate tube)");
    }
  }
  if (profile.alpha.front() < 0.0 || profile.alpha.back() < 0.0) {
    throw PreconditionError("calabi_to_tube: alpha is negative at an endpoint");
  }
  auto tube = std::make_shared<const CalabiTube>(profile, p);

  WarpedProductMetric w;
  w.t_min = 0.0;
  w.t_max = tube->t_max();
  w.base = einstein_base(p.n, p.k);
  w.s_of_t = [tube](double t) { return tube->s_of_t(t); };
  w.t_of_s = [tube](double s) { return tube->t_of_s(s); };
  w.H = [tube](double t) {
    const Jet a = tube->alpha(tube->s_of_t(t));
    const double h = std::sqrt(a.value);
    return Jet{h, 0.5 * a.d1, 0.5 * a.d2 * h};
  };
  w.F = [tube](double t) {
    const double s = tube->s_of_t(t);
    const Jet a = tube->alpha(s);
    const double f = std::sqrt(tube->u(s));
    const double root = std::sqrt(a.value);
    return Jet{f, root / f, 0.5 * a.d1 / f - a.value / (f * f * f)};
  };
  const double B = p.B, C = p.C;
  w.f = [tube, B, C](double t) {
    const double s = tube->s_of_t(t);
    const Jet a = tube->alpha(s);
    return Jet{B * s + C, B * std::sqrt(a.value), 0.5 * B * a.d1};
  };
  return w;
}

ShapeProfile shape_profile(const WarpedProductMetric& w, double t) {
  const Jet H = w.H(t), F = w.F(t);
  const int dim = w.base.frame.dim();
  ShapeProfile out;
  out.m = (dim - 1) / 2;
  out.reeb = H.d1 / H.value;
  out.horizontal = F.d1 / F.value;
  const Matrix reeb_proj = w.base.zeta * w.base.eta.transpose();
  out.op = out.reeb * reeb_proj + out.horizontal * (Matrix::Identity(dim, dim) - reeb_proj);
  out.trace = out.reeb + 2.0 * out.m * out.horizontal;
  out.trace_sq = out.reeb * out.reeb + 2.0 * out.m * out.horizontal * out.horizontal;
  out.trace_prime = (H.d2 / H.value - out.reeb * out.reeb) +
                    2.0 * out.m * (F.d2 / F.value - out.horizontal * out.horizontal);
  return out;
}

TubeRicci tube_ricci(const WarpedProductMetric& w, double t) {
  const Jet H = w.H(t), F = w.F(t);
  if (!(H.value > 0.0) || !(F.value > 0.0)) {
    throw DomainError("tube_ricci: H and F must be positive at t = " + std::to_string(t));
  }
  const int dim = w.base.frame.dim();
  const int m = (dim - 1) / 2;
  const DeformedCurvature slice = deformed_ricci(w.base, {1, H.value, F.value});
  const Matrix& g = slice.deformed.frame.metric();

  const double h = H.d1 / H.value, phi = F.d1 / F.value;
  const double h_prime = H.d2 / H.value - h * h, phi_prime = F.d2 / F.value - phi * phi;
  const Matrix reeb_proj = w.base.zeta * w.base.eta.transpose();
  const Matrix horiz_proj = Matrix::Identity(dim, dim) - reeb_proj;
  const Matrix L = h * reeb_proj + phi * horiz_proj;
  const Matrix L_prime = h_prime * reeb_proj + phi_prime * horiz_proj;
  const double trace = h + 2.0 * m * phi;

  TubeRicci out;
  out.slice_metric = g;
  out.tangential = slice.ricci - trace * g * L - g * L_prime;
  out.tangential = 0.5 * (out.tangential + out.tangential.transpose());
  // Rc(N, N) = -tr L' - tr L^2
  out.normal = -H.d2 / H.value - 2.0 * m * F.d2 / F.value;
  // Rc(X, N) = -X(tr L) - (delta L)(X): both vanish on homogeneous slices.
  out.mixed = Vector::Zero(dim);
  return out;
}

double tube_scalar(const TubeRicci& rc) {
  return rc.normal + rc.slice_metric.inverse().cwiseProduct(rc.tangential).sum();
}

double tube_ricci_norm_sq(const TubeRicci& rc) {
  const Matrix g_inv = rc.slice_metric.inverse();
  const Matrix mixed_up = g_inv * rc.tangential;
  return rc.normal * rc.normal + 2.0 * rc.mixed.dot(g_inv * rc.mixed) + (mixed_up * mixed_up).trace();
}

double SolitonResidual::max() const { return std::max({R1, R2_zeta, R2_horiz, R3, R4}); }

std::vector<double> interior_grid(double t_min, double t_max, int points) {
  if (points < 1) throw InvalidInput("interior_grid: need at least one point");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = t_min + (t_max - t_min) * (i + 1) / (points + 1.0);
  return grid;
}

SolitonResidual soliton_residual(const WarpedProductMetric& w, const SolitonProblem& p, int points) {
  SolitonResidual out;
  const std::vector<double> grid = interior_grid(w.t_min, w.t_max, points);
  out.rows.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const double t = grid[i];
    const Jet H = w.H(t), F = w.F(t), f = w.f(t);
    const TubeRicci rc = tube_ricci(w, t);
    const ShapeProfile shape = shape_profile(w, t);
    const Matrix& g = rc.slice_metric;
    const Matrix E = rc.tangential + f.d1 * g * shape.op - p.lambda * g;
    const Matrix basis = adapted_basis(slice_structure(w, H.value, F.value));
    const Matrix E_basis = basis.transpose() * E * basis;

    ResidualRow& row = out.rows[i];
    row.t = t;
    row.s = w.s_of_t ? w.s_of_t(t) : std::numeric_limits<double>::quiet_NaN();
    row.R1 = std::abs(p.lambda - (rc.normal + f.d2));
    row.R2_zeta = std::abs(E_basis(0, 0));
    double horiz = 0.0;
    for (int a = 0; a < E_basis.rows(); ++a)
      for (int b = 0; b < E_basis.cols(); ++b)
        if (a != 0 || b != 0) horiz = std::max(horiz, std::abs(E_basis(a, b)));
    row.R2_horiz = horiz;
    row.R3 = std::abs(F.value * F.d1 - H.value);
    row.R4 = std::abs(f.d1 - p.B * H.value);
  });
  for (const ResidualRow& row : out.rows) {
    out.R1 = std::max(out.R1, row.R1);
    out.R2_zeta = std::max(out.R2_zeta, row.R2_zeta);
    out.R2_horiz = std::max(out.R2_horiz, row.R2_horiz);
    out.R3 = std::max(out.R3, row.R3);
    out.R4 = std::max(out.R4, row.R4);
  }
  return out;
}

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::SmoothPoint: return "SmoothPoint";
    case BoundaryKind::SmoothCircleCollapse: return "SmoothCircleCollapse";
    case BoundaryKind::RegularBoundary: return "RegularBoundary";
    case BoundaryKind::NotSmooth: return "NotSmooth";
  }
  return "NotSmooth";
}

BoundaryReport boundary_check(const WarpedProductMetric& w, End end, const BoundaryOptions& options) {
  if (!std::isfinite(w.t_min) || !std::isfinite(w.t_max)) {
    throw InvalidInput("boundary_check: endpoint must be finite");
  }
  const double t_end = end == End::Lower ? w.t_min : w.t_max;
  const double dir = end == End::Lower ? 1.0 : -1.0;
  const double delta0 = std::min(0.05, 0.05 * (w.t_max - w.t_min));

  constexpr int levels = 7;
  std::vector<double> deltas(levels);
  std::vector<double> hs(levels), fs(levels), dhs(levels), dfs(levels);
  for (int i = 0; i < levels; ++i) {
    deltas[i] = delta0 / std::pow(2.0, i);
    const double t = t_end + dir * deltas[i];
    const Jet H = w.H(t), F = w.F(t);
    hs[i] = H.value;
    fs[i] = F.value;
    dhs[i] = H.d1;
    dfs[i] = F.d1;
  }

  BoundaryReport report;
  double eh = 0.0, ef = 0.0, edh = 0.0, edf = 0.0;
  report.H = neville_at_zero(deltas, hs, &eh);
  report.F = neville_at_zero(deltas, fs, &ef);
  report.dH = neville_at_zero(deltas, dhs, &edh);
  report.dF = neville_at_zero(deltas, dfs, &edf);
  report.extrapolation_error = std::max({eh, ef, edh, edf});

  std::ostringstream why;
  why.precision(10);
  if (!(report.extrapolation_error <= options.max_error) || !std::isfinite(report.H) ||
      !std::isfinite(report.F)) {
    why << "Richardson extrapolation did not converge (error " << report.extrapolation_error << ")";
    report.kind = BoundaryKind::NotSmooth;
    report.reason = why.str();
    return report;
  }

  const bool h_collapses = std::abs(report.H) < options.zero_tol;
  const bool f_collapses = std::abs(report.F) < options.zero_tol;
  const double slope_h = std::abs(report.dH), slope_f = std::abs(report.dF);

  if (h_collapses && f_collapses) {
    if (std::abs(slope_h - 1.0) > options.slope_tol || std::abs(slope_f - 1.0) > options.slope_tol) {
      why << "point collapse with |H'| = " << slope_h << ", |F'| = " << slope_f
          << ": the limit H'^2 eta(x)eta + F'^2 g_perp is not the round metric (cone angle)";
      report.kind = BoundaryKind::NotSmooth;
      report.reason = why.str();
      return report;
    }
    const StructureClass base_class = classify(w.base);
    bool round = base_class.tag == StructureTag::DeformedSasakian && std::abs(base_class.b - 1.0) < 1e-8;
    const Matrix horizontal = horizontal_basis(w.base);
    for (int i = 0; round && i < 8; ++i) {
      const double angle = 3.141592653589793 * i / 8.0;
      const Vector x = std::cos(angle) * horizontal.col(0) + std::sin(angle) * horizontal.col(1);
      round = std::abs(phi_sectional(w.base, x) - 1.0) < 1e-8;
    }
    if (!round) {
      report.kind = BoundaryKind::NotSmooth;
      report.reason = "point collapse over a base that is not the standard Sasakian sphere";
      return report;
    }
    report.kind = BoundaryKind::SmoothPoint;
    report.reason = "H, F -> 0 with |H'| = |F'| = 1 over the Hopf-fibred round sphere";
    return report;
  }
  if (h_collapses) {
    if (std::abs(slope_h - 1.0) > options.slope_tol || slope_f > options.slope_tol) {
      why << "circle collapse with |H'| = " << slope_h << ", F' = " << report.dF
          << " (need |H'| = 1 and F' = 0)";
      report.kind = BoundaryKind::NotSmooth;
      report.reason = why.str();
      return report;
    }
    report.kind = BoundaryKind::SmoothCircleCollapse;
    report.reason = "Reeb circles collapse (H -> 0, F -> " + std::to_string(report.F) + ")";
    return report;
  }
  if (f_collapses) {
    report.kind = BoundaryKind::NotSmooth;
    report.reason = "F collapses while H stays positive";
    return report;
  }
  report.kind = BoundaryKind::RegularBoundary;
  report.reason = "H and F stay positive: the metric extends across the endpoint slice";
  return report;
}

ChartMetric tube_chart(const WarpedProductMetric& w) {
  const int d = w.base.frame.dim();
  ChartMetric chart;
  chart.dim = d + 1;
  const AlmostContactStructure base = w.base;
  const ProfileFn H = w.H, F = w.F, f = w.f;
  chart.metric_at = [base, H, F, d](const Vector& q) {
    const double h = H(q(0)).value, fv = F(q(0)).value;
    const Matrix g_t = fv * fv * base.frame.metric() + (h * h - fv * fv) * base.eta * base.eta.transpose();
    const Matrix psi = group_coframe(base.frame, q.tail(d));
    Matrix g = Matrix::Zero(d + 1, d + 1);
    g(0, 0) = 1.0;
    g.bottomRightCorner(d, d) = psi.transpose() * g_t * psi;
    return g;
  };
  chart.scalar_field_at = [f](const Vector& q) { return f(q(0)).value; };
  return chart;
}

std::function<Matrix(const Vector&)> tube_complex_structure(const WarpedProductMetric& w) {
  const int d = w.base.frame.dim();
  const AlmostContactStructure base = w.base;
  const ProfileFn H = w.H;
  return [base, H, d](const Vector& q) {
    const double h = H(q(0)).value;
    const Matrix psi = group_coframe(base.frame, q.tail(d));
    const Matrix psi_inv = psi.inverse();
    Matrix j = Matrix::Zero(d + 1, d + 1);
    j.block(0, 1, 1, d) = h * base.eta.transpose() * psi;
    j.block(1, 0, d, 1) = -psi_inv * base.zeta / h;
    j.bottomRightCorner(d, d) = psi_inv * base.phi * psi;
    return j;
  };
}

Vector tube_hessian_eigenvalues(const WarpedProductMetric& w, double t) {
  const Jet H = w.H(t), F = w.F(t), f = w.f(t);
  const int d = w.base.frame.dim();
  Vector out(d + 1);
  out(0) = f.d2;
  out(1) = f.d1 * H.d1 / H.value;
  for (int i = 2; i <= d; ++i) out(i) = f.d1 * F.d1 / F.value;
  std::sort(out.data(), out.data() + out.size());
  return out;
}

}  // namespace soliton_forge
