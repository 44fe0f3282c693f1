#include <cmath>

#include "doctest.h"
#include "soliton_forge/errors.hpp"
#include "soliton_forge/identity_suite.hpp"
#include "soliton_forge/model_zoo.hpp"
#include "test_support.hpp"

using namespace soliton_forge;

namespace {

SolitonSample gaussian_sample(double lambda) {
  // Quadratics have no truncation error, so a wide stencil only reduces rounding.
  return chart_soliton_sample(gaussian_soliton(4, lambda), radial_sample_points(4, 0.3, 1.5, 5, 3),
                              {0.05, 8}, {0.05, 6});
}

SolitonSample cigar_sample() {
  return chart_soliton_sample(cigar_soliton(), radial_sample_points(2, 0.3, 1.5, 13, 2));
}

// Cigar x line with the potential tilted along the line: still Rc + Hess f = 0, but grad f
// is no longer an eigenvector of Rc.
SolitonSample tilted_cigar_line(double tilt) {
  const SolitonChart cigar = cigar_soliton();
  ChartSample cs;
  cs.chart.dim = 3;
  cs.chart.metric_at = [cigar](const Vector& x) {
    Matrix g = Matrix::Identity(3, 3);
    g.topLeftCorner(2, 2) = cigar.chart.metric_at(x.head(2));
    return g;
  };
  cs.chart.scalar_field_at = [cigar, tilt](const Vector& x) {
    return cigar.chart.scalar_field_at(x.head(2)) + tilt * x(2);
  };
  SolitonSample s;
  s.geometry = cs;
  s.lambda = 0.0;
  for (const Vector& p : radial_sample_points(2, 0.4, 1.2, 3, 2)) {
    Vector q(3);
    q << p, 0.1;
    s.points.push_back(q);
  }
  return s;
}

SolitonProblem calabi_shrinker() {
  SolitonProblem p;
  p.lambda = 1.0;
  p.k = 4.0;
  p.B = 0.5;
  p.s_min = 0.0;
  p.s_max = 1.0;
  return p;
}

}  // namespace

TEST_CASE("Gaussian soliton: identities vanish") {
  const SolitonSample s = gaussian_sample(1.0);
  CHECK(sample_soliton_residual(s) < 1e-10);
  const IdentityReport r = soliton_identities(s);
  CHECK(r.trace < 1e-8);
  CHECK(r.bianchi < 1e-8);
  CHECK(r.conservation < 1e-8);
  CHECK(r.laplacian_S < 1e-8);
  REQUIRE(r.conservation_constants.size() == 1);
  CHECK(std::abs(r.conservation_constants[0]) < 1e-8);  // |grad f|^2 = 2 lambda f
  CHECK(killing_residual(s) < 1e-10);
}

TEST_CASE("Gaussian soliton: rectifiable, transnormal with b = 2 lambda f") {
  for (double lambda : {1.0, 0.5}) {
    const SolitonSample s = gaussian_sample(lambda);
    const RectifiabilityReport rect = rectifiability_report(s);
    CHECK(rect.rectifiable);
    CHECK(rect.eigenvector);
    CHECK(rect.parallel);
    CHECK(rect.consistent);
    const TransnormalReport fit = transnormal_fit(s);
    REQUIRE(fit.components.size() == 1);
    const TransnormalFit& c = fit.components[0];
    CHECK(c.transnormal);
    CHECK(c.isoparametric);
    CHECK(c.table.f.size() == 5);
    for (std::size_t i = 0; i < c.table.f.size(); ++i) {
      CHECK(std::abs(c.table.b[i] - 2 * lambda * c.table.f[i]) < 1e-9);
      CHECK(std::abs(c.table.a[i] - 4 * lambda) < 1e-8);
    }
    REQUIRE(c.segment_quadrature.has_value());
    // f-segment between radii 0.3 and 1.5 has length 1.2.
    CHECK(std::abs(*c.segment_quadrature - 1.2) < 1e-8);
    CHECK(std::abs(*c.segment_traced - 1.2) < 1e-8);
    CHECK(c.segment_agrees);
    const HessianSpectrum spec = hessian_spectrum(s);
    for (const Vector& e : spec.eigenvalues) CHECK(std::abs(e.maxCoeff() - lambda) + std::abs(e.minCoeff() - lambda) < 1e-8);
  }
}

TEST_CASE("cigar soliton: identities and conservation law S + |grad f|^2 = 4") {
  const SolitonSample s = cigar_sample();
  CHECK(sample_soliton_residual(s) < 1e-8);
  const IdentityReport r = soliton_identities(s);
  CHECK(r.max() < 1e-6);
  REQUIRE(r.conservation_constants.size() == 1);
  CHECK(std::abs(r.conservation_constants[0] - 4.0) < 1e-6);
  CHECK(killing_residual(s) < 1e-6);
  const RectifiabilityReport rect = rectifiability_report(s);
  CHECK((rect.rectifiable && rect.eigenvector && rect.parallel && rect.consistent));
  const TransnormalReport fit = transnormal_fit(s);
  CHECK(fit.global.transnormal);
  CHECK(fit.global.isoparametric);
  CHECK(fit.global.segment_agrees);
}

TEST_CASE("negative control: tilted potential fails all three rectifiability conditions") {
  const SolitonSample s = tilted_cigar_line(0.3);
  CHECK(sample_soliton_residual(s) < 1e-8);
  const RectifiabilityReport rect = rectifiability_report(s);
  CHECK_FALSE(rect.rectifiable);
  CHECK_FALSE(rect.eigenvector);
  CHECK_FALSE(rect.parallel);
  CHECK(rect.consistent);
  CHECK_THROWS_AS(killing_residual(s), Unsupported);
}

TEST_CASE("negative control: Hess f that is not J-invariant is not Killing") {
  SolitonChart model = gaussian_soliton(4, 1.0);
  model.chart.scalar_field_at = [](const Vector& x) { return 0.5 * x(0) * x(0) + 1.5 * x(1) * x(1) + x(2) * x(3); };
  const SolitonSample s = chart_soliton_sample(model, radial_sample_points(4, 0.5, 1.0, 2, 2));
  CHECK(killing_residual(s) > 1e-2);
  CHECK_THROWS_AS(soliton_identities(s), PreconditionError);
}

TEST_CASE("two components at the same levels with different scales are not globally transnormal") {
  ChartSample cs;
  cs.chart.dim = 4;
  cs.chart.metric_at = [](const Vector&) { return Matrix(Matrix::Identity(4, 4)); };
  const Vector left = -3.0 * Vector::Unit(4, 0), right = 3.0 * Vector::Unit(4, 0);
  cs.chart.scalar_field_at = [=](const Vector& x) {
    return x(0) < 0 ? 0.5 * (x - left).squaredNorm() : 1.0 * (x - right).squaredNorm();
  };
  cs.inner = {0.05, 8};
  cs.outer = {0.05, 6};
  SolitonSample s;
  s.geometry = cs;
  // Same f-levels on both sides: radius r on the left, r / sqrt(2) on the right.
  for (double r : {0.5, 0.8, 1.1, 1.4}) {
    for (const Vector& d : radial_sample_points(4, 1.0, 1.0, 1, 2)) {
      s.points.push_back(left + r * d);
      s.components.push_back(0);
      s.points.push_back(right + (r / std::sqrt(2.0)) * d);
      s.components.push_back(1);
    }
  }
  const TransnormalReport fit = transnormal_fit(s);
  REQUIRE(fit.components.size() == 2);
  CHECK(fit.components[0].transnormal);
  CHECK(fit.components[1].transnormal);
  CHECK_FALSE(fit.global.transnormal);
  REQUIRE(fit.global.witness.has_value());
  CHECK(s.components[fit.global.witness->first] != s.components[fit.global.witness->second]);
  // b = 2 lambda f on each side: lambda = 1 and 2.
  CHECK(fit.components[0].table.b[0] == doctest::Approx(2.0 * fit.components[0].table.f[0]));
  CHECK(fit.components[1].table.b[0] == doctest::Approx(4.0 * fit.components[1].table.f[0]));
}

TEST_CASE("Calabi pipeline soliton passes the identity suite") {
  const SolitonProblem p = calabi_shrinker();
  const WarpedProductMetric w = calabi_to_tube(solve_alpha(p, 0.0), p);
  CHECK(soliton_residual(w, p).max() < 1e-6);
  const SolitonSample s = tube_soliton_sample(w, p.lambda, 6, 2);

  const IdentityReport r = soliton_identities(s);
  CHECK(r.trace < 1e-5);
  CHECK(r.bianchi < 1e-5);
  CHECK(r.conservation < 1e-5);
  CHECK(r.laplacian_S < 1e-5);

  // The chart view agrees with the reduced formulas.
  SolitonSample chart_view = s;
  chart_view.geometry = as_chart(s);
  chart_view.points.resize(2);
  CHECK(sample_soliton_residual(chart_view) < 1e-5);

  CHECK(killing_residual(s) < 1e-6);
  const RectifiabilityReport rect = rectifiability_report(s);
  CHECK((rect.rectifiable && rect.eigenvector && rect.parallel && rect.consistent));

  const HessianSpectrum spec = hessian_spectrum(s);
  CHECK(spec.pair_deviation < 1e-7);
  CHECK(spec.slice_deviation < 1e-7);

  const TransnormalReport fit = transnormal_fit(s);
  CHECK(fit.global.transnormal);
  CHECK(fit.global.isoparametric);
}
