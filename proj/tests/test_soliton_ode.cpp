#include <cmath>

#include "doctest.h"
#include "soliton_forge/errors.hpp"
#include "soliton_forge/model_zoo.hpp"
#include "soliton_forge/soliton_ode.hpp"
#include "test_support.hpp"

using namespace soliton_forge;
using test_support::max_abs;
using test_support::random_vector;

namespace {

WarpedProductMetric explicit_tube(ModelKind base, double t_min, double t_max, ProfileFn H, ProfileFn F,
                                  ProfileFn f) {
  WarpedProductMetric w;
  w.t_min = t_min;
  w.t_max = t_max;
  w.H = std::move(H);
  w.F = std::move(F);
  w.f = std::move(f);
  w.base = tanno_model(base);
  return w;
}

Jet sine(double t) { return {std::sin(t), std::cos(t), -std::sin(t)}; }
Jet identity(double t) { return {t, 1.0, 0.0}; }
Jet zero(double) { return {}; }

// Round unit 4-sphere as dt^2 + sin^2 t g_{S^3}.
WarpedProductMetric round_s4() {
  return explicit_tube(ModelKind::Sphere3, 0.0, M_PI, sine, sine, zero);
}

SolitonProblem fubini_study() {
  SolitonProblem p;
  p.lambda = 6.0;
  p.k = 4.0;
  p.n = 1;
  p.s_min = 0.0;
  p.s_max = 0.6;
  return p;
}

SolitonProblem gaussian_problem(double lambda) {
  SolitonProblem p;
  p.lambda = lambda;
  p.k = 4.0;
  p.B = lambda;
  p.s_min = 0.0;
  p.s_max = 2.0;
  return p;
}

// Frobenius series of the alpha ODE at a singular start (sigma = s - s_min).
double frobenius(const SolitonProblem& p, double sigma) {
  double a_prev = 0.0, sum = 0.0, power = 1.0;
  for (int j = 1; j < 80; ++j) {
    const double a = ((j == 1 ? p.k : 0.0) - (j == 2 ? 2.0 * p.lambda : 0.0) + p.B * a_prev) / (j + p.n);
    power *= sigma;
    sum += a * power;
    a_prev = a;
  }
  return sum;
}

}  // namespace

TEST_CASE("local polynomial reproduces degree-7 polynomials and converges at high order") {
  std::vector<double> x, y;
  for (int i = 0; i <= 20; ++i) {
    const double v = -1.0 + 0.09 * i + 0.004 * i * i;
    x.push_back(v);
    y.push_back(std::pow(v, 7) - v * v);
  }
  const LocalPolynomial poly(x, y);
  for (double v : {-1.0, -0.93, 0.1, 0.77, x.back()}) {
    const Jet j = poly(v);
    CHECK(j.value == doctest::Approx(std::pow(v, 7) - v * v).epsilon(1e-11));
    CHECK(j.d1 == doctest::Approx(7 * std::pow(v, 6) - 2 * v).epsilon(1e-10));
    CHECK(j.d2 == doctest::Approx(42 * std::pow(v, 5) - 2).epsilon(1e-9));
  }
  CHECK_THROWS_AS(poly(x.front() - 0.1), DomainError);
  CHECK_THROWS_AS(LocalPolynomial({0.0, 1.0}, {0.0, 1.0}), InvalidInput);

  // Second derivative of sin on non-uniform nodes: halving the spacing cuts the error by
  // about 2^6, both inside and at the ends.
  auto d2_error = [](int n, double v) {
    std::vector<double> xs, ys;
    for (int i = 0; i <= n; ++i) {
      const double u = static_cast<double>(i) / n;
      xs.push_back(u + 0.1 * u * u);
      ys.push_back(std::sin(3 * xs.back()));
    }
    return std::abs(LocalPolynomial(xs, ys)(v).d2 + 9 * std::sin(3 * v));
  };
  for (double v : {0.0, 0.43, 1.1}) {
    const double coarse = d2_error(40, v), fine = d2_error(80, v);
    CHECK(fine < 1e-6);
    CHECK(coarse / fine > 30.0);
  }
}

TEST_CASE("Dormand-Prince integrates y' = y to tolerance") {
  Vector y0(1);
  y0(0) = 1.0;
  double last = 0.0, t_last = 0.0;
  const OdeStats stats = integrate_dopri5(
      [](double, const Vector& y) { return Vector(y); }, 0.0, y0, 2.0, {}, [&](const OdeStep& step) {
        CHECK(std::abs(step.dense(0.5 * (step.t0 + step.t1))(0) - std::exp(0.5 * (step.t0 + step.t1))) <
              1e-8 * std::exp(step.t1));
        last = step.y1(0);
        t_last = step.t1;
        return true;
      });
  CHECK(t_last == 2.0);
  CHECK(std::abs(last - std::exp(2.0)) < 1e-8);
  CHECK(stats.accepted > 0);
}

TEST_CASE("problem validation") {
  SolitonProblem p = fubini_study();
  CHECK_NOTHROW(validate_problem(p));
  CHECK(singular_start(p));
  p.s_max = p.s_min;
  CHECK_THROWS_AS(validate_problem(p), InvalidInput);
  p = fubini_study();
  p.A = -1.0;
  CHECK_THROWS_AS(validate_problem(p), InvalidInput);
  p = fubini_study();
  p.n = 0;
  CHECK_THROWS_AS(validate_problem(p), InvalidInput);
  p = fubini_study();
  p.lambda = std::nan("");
  CHECK_THROWS_AS(validate_problem(p), InvalidInput);
  CHECK_THROWS_AS(solve_alpha(fubini_study(), 0.3), InvalidInput);
}

TEST_CASE("alpha ODE: exact linear solution alpha = c (2s + A)") {
  // lambda = B c and k = 2c(n + 1) make alpha = c u exact.
  for (int n : {1, 2, 3}) {
    for (double c : {0.5, 1.0, 2.0}) {
      SolitonProblem p;
      p.n = n;
      p.B = 0.7;
      p.lambda = p.B * c;
      p.k = 2 * c * (n + 1);
      p.A = 0.4;
      p.s_min = -0.2;
      p.s_max = 3.0;
      const AlphaProfile profile = solve_alpha(p, 0.0);
      CHECK(profile.singular_start);
      CHECK_FALSE(profile.zero_crossing.has_value());
      double worst = 0.0;
      for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        const double exact = c * (2 * profile.grid[i] + p.A);
        worst = std::max(worst, std::abs(profile.alpha[i] - exact) / std::max(1.0, exact));
        CHECK(std::abs(profile.alpha_prime[i] - 2 * c) < 1e-8);
      }
      CHECK(worst < 1e-9);
      CHECK(profile.closed_form_gap < 1e-8);
      CHECK(profile.grid.size() >= 2048);
    }
  }
}

TEST_CASE("alpha ODE: singular start matches the Frobenius series") {
  for (double lambda : {-1.0, 0.0, 1.5}) {
    SolitonProblem p;
    p.lambda = lambda;
    p.k = 3.0;
    p.n = 2;
    p.B = -0.6;
    p.s_min = 0.0;
    p.s_max = 0.8;
    const AlphaProfile profile = solve_alpha(p, 0.0);
    CHECK(profile.alpha_prime.front() == doctest::Approx(p.k / (p.n + 1)));
    for (std::size_t i = 0; i < profile.grid.size(); i += 97) {
      if (profile.zero_crossing && i + 1 == profile.grid.size()) continue;
      CHECK(std::abs(profile.alpha[i] - frobenius(p, profile.grid[i])) < 1e-9);
    }
    CHECK(profile.closed_form_gap < 1e-8);
  }
}

TEST_CASE("alpha ODE: regular start agrees with the closed form, zero crossing is bracketed") {
  SolitonProblem p = fubini_study();
  p.s_min = 0.1;
  p.s_max = 1.0;
  const double u0 = 0.2;
  const AlphaProfile profile = solve_alpha(p, u0 - u0 * u0);
  CHECK_FALSE(profile.singular_start);
  REQUIRE(profile.zero_crossing.has_value());
  CHECK(profile.zero_crossing->s_hi - profile.zero_crossing->s_lo < 1e-8);
  CHECK(std::abs(profile.grid.back() - 0.5) < 1e-8);
  CHECK(profile.alpha.back() == 0.0);
  CHECK(profile.closed_form_gap < 1e-8);
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    const double u = 2 * profile.grid[i];
    CHECK(std::abs(profile.alpha[i] - (u - u * u)) < 1e-9);
  }
}

TEST_CASE("alpha ODE: immediate non-positivity is an empty profile") {
  SolitonProblem p = fubini_study();
  p.k = -1.0;
  CHECK_THROWS_AS(solve_alpha(p, 0.0), EmptyProfile);
  p = fubini_study();
  p.s_min = 0.6;
  p.s_max = 1.0;
  CHECK_THROWS_AS(solve_alpha(p, 0.0), EmptyProfile);
  CHECK_THROWS_AS(solve_alpha(p, -0.1), EmptyProfile);
}

TEST_CASE("closed form propagates the Gaussian profile exactly") {
  const SolitonProblem p = gaussian_problem(1.0);
  CHECK(closed_form_alpha(0.0, 0.0, 1.3, p) == doctest::Approx(2.6).epsilon(1e-13));
  CHECK(closed_form_alpha(0.4, 0.8, 1.3, p) == doctest::Approx(2.6).epsilon(1e-13));
  CHECK_THROWS_AS(closed_form_alpha(0.0, 0.0, -1.0, p), DomainError);
}

TEST_CASE("tube Ricci agrees with the finite-difference oracle on the tube chart") {
  auto H = [](double t) { return Jet{1.0 + 0.3 * std::sin(t), 0.3 * std::cos(t), -0.3 * std::sin(t)}; };
  auto F = [](double t) { return Jet{1.2 + 0.2 * t * t, 0.4 * t, 0.4}; };
  for (ModelKind kind : {ModelKind::Sphere3, ModelKind::SL2RCover, ModelKind::Nil3}) {
    CAPTURE(model_name(kind));
    const WarpedProductMetric w = explicit_tube(kind, 0.0, 2.0, H, F, zero);
    const ChartMetric chart = tube_chart(w);
    for (int trial = 0; trial < 4; ++trial) {
      Vector q(4);
      q(0) = test_support::uniform(0.3, 1.7);
      q.tail(3) = random_vector(3, -0.4, 0.4);
      const CurvatureReport oracle = fd_curvature_oracle(chart, q, 1e-3);
      Matrix fields = Matrix::Zero(4, 4);
      fields(0, 0) = 1.0;
      fields.bottomRightCorner(3, 3) = group_coframe(w.base.frame, q.tail(3)).inverse();
      const Matrix rc = fields.transpose() * oracle.ricci * fields;
      const TubeRicci exact = tube_ricci(w, q(0));
      CHECK(std::abs(rc(0, 0) - exact.normal) < 1e-6);
      CHECK(max_abs(rc.block(1, 0, 3, 1)) < 1e-6);
      CHECK(max_abs(rc.bottomRightCorner(3, 3) - exact.tangential) < 1e-6);
      CHECK(std::abs(tube_scalar(exact) - oracle.scalar) < 1e-6);
    }
  }
}

TEST_CASE("round 4-sphere tube is Einstein with Rc = 3g") {
  const WarpedProductMetric w = round_s4();
  for (double t : interior_grid(w.t_min, w.t_max, 9)) {
    const TubeRicci rc = tube_ricci(w, t);
    CHECK(std::abs(rc.normal - 3.0) < 1e-13);
    CHECK(max_abs(rc.tangential - 3.0 * rc.slice_metric) < 1e-12);
    CHECK(tube_scalar(rc) == doctest::Approx(12.0).epsilon(1e-13));
    CHECK(tube_ricci_norm_sq(rc) == doctest::Approx(36.0).epsilon(1e-12));
  }
  CHECK(profile_self_consistency(w) < 1e-7);
}

TEST_CASE("boundary classification") {
  const BoundaryReport lower = boundary_check(round_s4(), End::Lower);
  CHECK(lower.kind == BoundaryKind::SmoothPoint);
  CHECK(boundary_check(round_s4(), End::Upper).kind == BoundaryKind::SmoothPoint);
  CHECK(std::abs(lower.dH - 1.0) < 1e-8);

  // Cone: H = F = 2 t has angle excess.
  auto twice = [](double t) { return Jet{2 * t, 2.0, 0.0}; };
  const BoundaryReport cone = boundary_check(explicit_tube(ModelKind::Sphere3, 0, 1, twice, twice, zero), End::Lower);
  CHECK(cone.kind == BoundaryKind::NotSmooth);
  CHECK(cone.reason.find("cone") != std::string::npos);

  // Point collapse over a non-round base.
  CHECK(boundary_check(explicit_tube(ModelKind::Nil3, 0, 1, identity, identity, zero), End::Lower).kind ==
        BoundaryKind::NotSmooth);

  auto one = [](double) { return Jet{1.0, 0.0, 0.0}; };
  CHECK(boundary_check(explicit_tube(ModelKind::Nil3, 0, 1, identity, one, zero), End::Lower).kind ==
        BoundaryKind::SmoothCircleCollapse);
  const WarpedProductMetric regular = explicit_tube(ModelKind::Nil3, 0, 1, one, one, zero);
  CHECK(boundary_check(regular, End::Lower).kind == BoundaryKind::RegularBoundary);
  CHECK(boundary_check(regular, End::Upper).kind == BoundaryKind::RegularBoundary);
  CHECK(boundary_check(explicit_tube(ModelKind::Nil3, 0, 1, one, identity, zero), End::Lower).kind ==
        BoundaryKind::NotSmooth);
}

TEST_CASE("Gaussian soliton from the Calabi ansatz") {
  for (double lambda : {1.0, -0.5}) {
    CAPTURE(lambda);
    const SolitonProblem p = gaussian_problem(lambda);
    const AlphaProfile profile = solve_alpha(p, 0.0);
    const WarpedProductMetric w = calabi_to_tube(profile, p);
    CHECK(w.t_max == doctest::Approx(2.0).epsilon(1e-10));  // t = sqrt(2s)
    for (double t : {0.01, 0.5, 1.3, 1.99}) {
      CHECK(std::abs(w.H(t).value - t) < 1e-9);
      CHECK(std::abs(w.F(t).value - t) < 1e-9);
      CHECK(std::abs(w.f(t).value - 0.5 * lambda * t * t) < 1e-9);
      CHECK(std::abs(w.s_of_t(t) - 0.5 * t * t) < 1e-9);
    }
    const SolitonResidual r = soliton_residual(w, p);
    CHECK(r.rows.size() == 200);
    CHECK(r.max() < 1e-6);
    CHECK(boundary_check(w, End::Lower).kind == BoundaryKind::SmoothPoint);
    CHECK(boundary_check(w, End::Upper).kind == BoundaryKind::RegularBoundary);
    const Vector hess = tube_hessian_eigenvalues(w, 1.0);
    CHECK(max_abs(hess - Vector::Constant(4, lambda)) < 1e-8);
  }
}

TEST_CASE("Fubini-Study CP^2 from the Calabi ansatz") {
  const SolitonProblem p = fubini_study();
  const AlphaProfile profile = solve_alpha(p, 0.0);
  REQUIRE(profile.zero_crossing.has_value());
  const WarpedProductMetric w = calabi_to_tube(profile, p);
  // t = int ds / sqrt(u - u^2) with u = 2s: t_max = pi / 2.
  CHECK(w.t_max == doctest::Approx(M_PI / 2).epsilon(1e-8));
  const SolitonResidual r = soliton_residual(w, p);
  CHECK(r.max() < 1e-6);
  for (double t : interior_grid(w.t_min, w.t_max, 7)) {
    const TubeRicci rc = tube_ricci(w, t);
    CHECK(std::abs(rc.normal - 6.0) < 1e-6);
    CHECK(max_abs(rc.tangential - 6.0 * rc.slice_metric) < 1e-6);
  }
  CHECK(boundary_check(w, End::Lower).kind == BoundaryKind::SmoothPoint);
  const BoundaryReport upper = boundary_check(w, End::Upper);
  CHECK(upper.kind == BoundaryKind::SmoothCircleCollapse);
  CHECK(upper.F == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(profile_self_consistency(w) < 1e-6);
  CHECK_THROWS_AS(w.H(w.t_max + 0.1), DomainError);

  // Ending exactly at the zero of alpha gives the same tube.
  SolitonProblem exact_end = p;
  exact_end.s_max = 0.5;
  const AlphaProfile truncated = solve_alpha(exact_end, 0.0);
  CHECK(truncated.alpha.back() == 0.0);
  const WarpedProductMetric w2 = calabi_to_tube(truncated, exact_end);
  CHECK(w2.t_max == doctest::Approx(M_PI / 2).epsilon(1e-8));
  CHECK(boundary_check(w2, End::Upper).kind == BoundaryKind::SmoothCircleCollapse);
}

TEST_CASE("calabi_to_tube rejects a profile touching zero inside") {
  AlphaProfile profile = solve_alpha(gaussian_problem(1.0), 0.0);
  profile.alpha[profile.alpha.size() / 2] = 0.0;
  CHECK_THROWS_AS(calabi_to_tube(profile, gaussian_problem(1.0)), PreconditionError);
}

TEST_CASE("tube complex structure squares to -1 and is orthogonal") {
  const SolitonProblem p = fubini_study();
  const WarpedProductMetric w = calabi_to_tube(solve_alpha(p, 0.0), p);
  const ChartMetric chart = tube_chart(w);
  const auto J = tube_complex_structure(w);
  for (int trial = 0; trial < 5; ++trial) {
    Vector q(4);
    q(0) = test_support::uniform(0.2, 1.3);
    q.tail(3) = random_vector(3, -0.5, 0.5);
    const Matrix j = J(q);
    const Matrix g = chart.metric_at(q);
    CHECK(max_abs(j * j + Matrix::Identity(4, 4)) < 1e-12);
    CHECK(max_abs(j.transpose() * g * j - g) < 1e-12);
  }
}
