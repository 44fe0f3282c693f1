#include <cmath>

#include "doctest.h"
#include "soliton_forge/almost_contact.hpp"
#include "soliton_forge/errors.hpp"
#include "soliton_forge/model_zoo.hpp"
#include "test_support.hpp"

using namespace soliton_forge;
using test_support::max_abs;
using test_support::random_horizontal_unit;
using test_support::uniform;

namespace {

// Solvable frame [e2, e0] = e0, [e2, e1] = -e1 with identity metric. With zeta = e2 the
// Reeb flow stretches the horizontal plane (not bundle-like); with zeta = e0 the Reeb
// curves are not geodesics.
StructureFrame solvable_frame() {
  Tensor3 c(3);
  c(0, 2, 0) = 1.0;
  c(0, 0, 2) = -1.0;
  c(1, 2, 1) = -1.0;
  c(1, 1, 2) = 1.0;
  return StructureFrame(c, Matrix::Identity(3, 3));
}

AlmostContactStructure structure_on(const StructureFrame& frame, int reeb) {
  const int a = (reeb + 1) % 3, b = (reeb + 2) % 3;
  Matrix phi = Matrix::Zero(3, 3);
  phi(b, a) = 1.0;
  phi(a, b) = -1.0;
  return {frame, Vector::Unit(3, reeb), Vector::Unit(3, reeb), phi, std::nullopt};
}

// Flat R^3 with Phi parallel and eta closed: the product of a line with C.
AlmostContactStructure flat_product() {
  return structure_on(StructureFrame::abelian(Matrix::Identity(3, 3)), 2);
}

// Change of frame e_i -> s_i e_i with signs s_i.
AlmostContactStructure flip_frame(const AlmostContactStructure& acs, const Vector& s) {
  const int n = acs.frame.dim();
  Tensor3 c(n);
  const Tensor3& old = acs.frame.structure_constants();
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(k, i, j) = s(k) * s(i) * s(j) * old(k, i, j);
  const Matrix S = s.asDiagonal();
  return {StructureFrame(c, S * acs.frame.metric() * S), S * acs.zeta, S * acs.eta, S * acs.phi * S,
          acs.contact_scale};
}

double max_structure_difference(const AlmostContactStructure& a, const AlmostContactStructure& b) {
  double worst = max_abs(a.frame.metric() - b.frame.metric());
  worst = std::max(worst, max_abs(a.zeta - b.zeta));
  worst = std::max(worst, max_abs(a.eta - b.eta));
  worst = std::max(worst, max_abs(a.phi - b.phi));
  worst = std::max(worst, std::abs(a.contact_scale.value_or(0.0) - b.contact_scale.value_or(0.0)));
  return worst;
}

}  // namespace

TEST_CASE("validate: unit Sasakian 3-sphere passes every check") {
  const ValidationReport report = validate(tanno_model(ModelKind::Sphere3));
  CHECK(report.ok());
  CHECK(report.residuals.size() == 6);
  for (const auto& r : report.residuals) CHECK(r.value < 1e-12);
}

TEST_CASE("validate: eta(zeta) = 2 is reported") {
  AlmostContactStructure acs = tanno_model(ModelKind::Sphere3);
  acs.eta *= 2.0;
  const ValidationReport report = validate(acs);
  CHECK_FALSE(report.ok());
  CHECK(report.value("eta_zeta") == doctest::Approx(1.0));
  const auto failures = report.failures();
  CHECK(std::find(failures.begin(), failures.end(), "eta_zeta") != failures.end());
}

TEST_CASE("validate: even dimension is rejected") {
  AlmostContactStructure acs{StructureFrame::abelian(Matrix::Identity(2, 2)), Vector::Unit(2, 0),
                             Vector::Unit(2, 0), Matrix::Zero(2, 2), std::nullopt};
  CHECK_THROWS_AS(validate(acs), InvalidInput);
}

TEST_CASE("property: every (H,F) deformation of a valid structure is valid") {
  for (ModelKind kind : {ModelKind::Sphere3, ModelKind::SL2RCover, ModelKind::Nil3}) {
    for (int trial = 0; trial < 20; ++trial) {
      const DeformationParams p{trial % 2 == 0 ? 1 : -1, uniform(0.2, 5.0), uniform(0.2, 5.0)};
      const ValidationReport report = validate(hf_deform(tanno_model(kind), p), 1e-11);
      CHECK(report.ok());
    }
  }
  CHECK_THROWS_AS(hf_deform(tanno_model(ModelKind::Nil3), {1, -1.0, 1.0}), InvalidInput);
  CHECK_THROWS_AS(hf_deform(tanno_model(ModelKind::Nil3), {0, 1.0, 1.0}), InvalidInput);
}

TEST_CASE("hf_deform: identity and contact-scale rule") {
  const AlmostContactStructure s3 = tanno_model(ModelKind::Sphere3);
  CHECK(max_structure_difference(hf_deform(s3, {1, 1.0, 1.0}), s3) == 0.0);

  // H = F^2 preserves a = 1 (up to the sign); the scale is re-measured from d eta.
  for (double f : {0.5, 1.5, 3.0}) {
    for (int sign : {1, -1}) {
      const AlmostContactStructure d = hf_deform(s3, {sign, f * f, f});
      CHECK(*d.contact_scale == doctest::Approx(sign));
      const ContactScaleFit fit = fit_contact_scale(d);
      CHECK(fit.scale == doctest::Approx(sign).epsilon(1e-12));
      CHECK(fit.residual < 1e-12);
    }
  }
  // General H, F: measured scale matches a* = +-a H / F^2.
  for (int trial = 0; trial < 10; ++trial) {
    const DeformationParams p{1, uniform(0.2, 5.0), uniform(0.2, 5.0)};
    const AlmostContactStructure d = hf_deform(s3, p);
    CHECK(fit_contact_scale(d).scale == doctest::Approx(p.H / (p.F * p.F)).epsilon(1e-12));
  }
}

TEST_CASE("hf_deform preserves the Killing property") {
  for (ModelKind kind : {ModelKind::Sphere3, ModelKind::SL2RCover, ModelKind::Nil3}) {
    CHECK(killing_residual(tanno_model(kind)) < 1e-14);
    const AlmostContactStructure d = hf_deform(tanno_model(kind), {-1, uniform(0.2, 5.0), uniform(0.2, 5.0)});
    CHECK(killing_residual(d) < 1e-12);
  }
  const AlmostContactStructure stretched = structure_on(solvable_frame(), 2);
  CHECK(killing_residual(stretched) > 0.5);
  CHECK(killing_residual(hf_deform(stretched, {1, 2.0, 0.7})) > 0.1);
}

TEST_CASE("property: deformation composition law") {
  const AlmostContactStructure s3 = tanno_model(ModelKind::Sphere3);
  for (int trial = 0; trial < 20; ++trial) {
    const double c1 = uniform(0.2, 5.0), c2 = uniform(0.2, 5.0);
    const AlmostContactStructure twice = hf_deform(hf_deform(s3, {1, 1.0, c1}), {1, 1.0, c2});
    const AlmostContactStructure once = hf_deform(s3, {1, 1.0, c1 * c2});
    CHECK(max_structure_difference(twice, once) < 1e-12 * std::max(1.0, c1 * c1 * c2 * c2));
  }
}

TEST_CASE("A-tensor on the Reeb field") {
  SUBCASE("product structure has A = 0") {
    const ATensorReport report = a_tensor_report(flat_product());
    CHECK(max_abs(report.a_zeta) == 0.0);
  }
  SUBCASE("unit Sasakian 3-sphere: A_X zeta = -Phi X") {
    const AlmostContactStructure s3 = tanno_model(ModelKind::Sphere3);
    const ATensorReport report = a_tensor_report(s3);
    CHECK(max_abs(report.a_zeta + s3.phi * report.horizontal) < 1e-14);
    CHECK(report.reeb_identity < 1e-10);
    CHECK(report.bracket_identity < 1e-10);
    CHECK(report.antisymmetry < 1e-10);
    CHECK(report.closing_sign == -1);
  }
  SUBCASE("(1,c) deformation: A'_X zeta' = -(b/c^2) Phi X") {
    for (double c : {0.25, 0.5, 2.0, 4.0}) {
      const AlmostContactStructure d = hf_deform(tanno_model(ModelKind::Sphere3), {1, 1.0, c});
      const ATensorReport report = a_tensor_report(d);
      CHECK(max_abs(report.a_zeta + d.phi * report.horizontal / (c * c)) < 1e-12);
      CHECK(report.reeb_identity < 1e-10);
    }
  }
  SUBCASE("non-bundle-like metric is rejected") {
    CHECK_THROWS_AS(a_tensor_on_reeb(structure_on(solvable_frame(), 2)), PreconditionError);
  }
}

TEST_CASE("geodesic Reeb checks agree") {
  for (ModelKind kind : {ModelKind::Sphere3, ModelKind::SL2RCover, ModelKind::Nil3}) {
    const ReebGeodesicChecks checks = geodesic_reeb_checks(tanno_model(kind));
    CHECK(checks.geodesic);
    CHECK(checks.eta_invariant);
    CHECK(checks.phi_reeb_parallel);
    CHECK(checks.deta_reeb_zero);
    CHECK(checks.consistent);
    CHECK_FALSE(checks.inconclusive);
  }
  // Reeb field along the stretched direction of a solvable group: all four fail together.
  const ReebGeodesicChecks bent = geodesic_reeb_checks(structure_on(solvable_frame(), 0));
  CHECK_FALSE(bent.geodesic);
  CHECK_FALSE(bent.eta_invariant);
  CHECK_FALSE(bent.phi_reeb_parallel);
  CHECK_FALSE(bent.deta_reeb_zero);
  CHECK(bent.consistent);
}

TEST_CASE("classify: Sasakian, deformed and product structures") {
  const AlmostContactStructure s3 = tanno_model(ModelKind::Sphere3);
  const StructureClass base = classify(s3);
  CHECK(base.tag == StructureTag::DeformedSasakian);
  CHECK(std::abs(base.b - 1.0) < 1e-10);

  for (double c : {0.25, 0.5, 2.0, 4.0}) {
    for (int sign : {1, -1}) {
      const StructureClass k = classify(hf_deform(s3, {sign, 1.0, c}));
      CHECK(k.tag == StructureTag::DeformedSasakian);
      CHECK(std::abs(k.b - sign / (c * c)) < 1e-8);
    }
  }

  const StructureClass flat = classify(flat_product());
  CHECK(flat.tag == StructureTag::ProductKahler);
  CHECK(flat.b == 0.0);

  const StructureClass neither = classify(structure_on(solvable_frame(), 2));
  CHECK(neither.tag == StructureTag::Neither);
  CHECK(neither.residual > 1e-8);
}

TEST_CASE("property: fitted b is invariant under sign flips of the frame") {
  for (ModelKind kind : {ModelKind::Sphere3, ModelKind::SL2RCover, ModelKind::Nil3}) {
    const AlmostContactStructure acs = hf_deform(tanno_model(kind), {1, 1.0, 0.7});
    const double b = classify(acs).b;
    for (int mask = 1; mask < 8; ++mask) {
      Vector s(3);
      for (int i = 0; i < 3; ++i) s(i) = (mask >> i) & 1 ? -1.0 : 1.0;
      CHECK(std::abs(classify(flip_frame(acs, s)).b - b) < 1e-12);
    }
  }
}

TEST_CASE("phi_sectional preconditions") {
  const AlmostContactStructure s3 = tanno_model(ModelKind::Sphere3);
  CHECK_THROWS_AS(phi_sectional(s3, s3.zeta), InvalidInput);
  CHECK_THROWS_AS(phi_sectional(s3, 2.0 * Vector::Unit(3, 0)), InvalidInput);
  CHECK(phi_sectional(s3, random_horizontal_unit(s3)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("deformed curvature closed forms match the frame computation") {
  for (ModelKind kind : {ModelKind::Sphere3, ModelKind::SL2RCover, ModelKind::Nil3}) {
    const AlmostContactStructure acs = tanno_model(kind);
    for (int trial = 0; trial < 20; ++trial) {
      const DeformationParams p{trial % 2 == 0 ? 1 : -1, uniform(0.2, 5.0), uniform(0.2, 5.0)};
      const DeformedCurvature closed = deformed_ricci(acs, p);
      const CurvatureReport exact = curvature_frame(closed.deformed.frame);
      const double scale = std::max(1.0, max_abs(exact.ricci));
      CHECK(max_abs(closed.ricci - exact.ricci) < 1e-8 * scale);
      CHECK(std::abs(closed.scalar - exact.scalar) < 1e-8 * std::max(1.0, std::abs(exact.scalar)));

      const Vector& zs = closed.deformed.zeta;
      const double kappa2 = p.H * p.H / std::pow(p.F, 4);
      CHECK(closed.kappa2 == kappa2);
      CHECK(closed.reeb_ricci == kappa2 * 2.0);
      CHECK(std::abs(zs.dot(exact.ricci * zs) - kappa2 * 2.0) < 1e-10 * std::max(1.0, kappa2));

      const Vector x = random_horizontal_unit(closed.deformed);
      CHECK(std::abs(exact.sectional(x, zs) - closed.reeb_sectional) < 1e-10 * std::max(1.0, kappa2));
    }
  }
}

TEST_CASE("horizontal sectional reading selected by the frame computation") {
  int plane_only_hits = 0, vector_scaled_hits = 0, trials = 0;
  for (ModelKind kind : {ModelKind::Sphere3, ModelKind::SL2RCover, ModelKind::Nil3}) {
    for (int trial = 0; trial < 20; ++trial) {
      const DeformationParams p{1, uniform(0.2, 5.0), uniform(0.2, 5.0)};
      const DeformedCurvature closed = deformed_ricci(tanno_model(kind), p);
      const AlmostContactStructure& d = closed.deformed;
      const Vector x = random_horizontal_unit(d);
      Vector y = random_horizontal_unit(d);
      y -= d.frame.inner(x, y) * x;
      y /= d.frame.norm(y);
      const double exact = curvature_frame(d.frame).sectional(x, y);
      const double tol = 1e-9 * std::max(1.0, std::abs(exact));
      ++trials;
      if (std::abs(closed.horizontal_sectional(x, y, SectionalReading::PlaneOnly) - exact) < tol) ++plane_only_hits;
      if (std::abs(closed.horizontal_sectional(x, y, SectionalReading::VectorScaled) - exact) < tol) ++vector_scaled_hits;
    }
  }
  CHECK(plane_only_hits == trials);
  CHECK(vector_scaled_hits < trials);
}

TEST_CASE("deformed_ricci preconditions and trivial deformation") {
  const AlmostContactStructure s3 = tanno_model(ModelKind::Sphere3);
  const DeformedCurvature same = deformed_ricci(s3, {1, 1.0, 1.0});
  CHECK(max_abs(same.ricci - curvature_frame(s3.frame).ricci) < 1e-14);
  CHECK(same.reeb_ricci == 2.0);

  AlmostContactStructure no_scale = s3;
  no_scale.contact_scale.reset();
  CHECK_THROWS_AS(deformed_ricci(no_scale, {1, 1.0, 1.0}), PreconditionError);
  AlmostContactStructure stretched = structure_on(solvable_frame(), 2);
  stretched.contact_scale = 1.0;
  CHECK_THROWS_AS(deformed_ricci(stretched, {1, 1.0, 1.0}), PreconditionError);
}

TEST_CASE("shape_classify") {
  const AlmostContactStructure s3 = tanno_model(ModelKind::Sphere3);
  const ShapeClass sphere = shape_classify(Matrix::Identity(3, 3), s3);
  CHECK(sphere.tag == StructureTag::DeformedSasakian);
  CHECK(sphere.alpha == doctest::Approx(1.0));
  CHECK(std::abs(sphere.beta) < 1e-14);

  const ShapeClass cylinder = shape_classify(s3.zeta * s3.eta.transpose(), s3);
  CHECK(cylinder.tag == StructureTag::ProductKahler);
  CHECK(cylinder.beta == doctest::Approx(1.0));

  Matrix distinct = Matrix::Identity(3, 3);
  distinct(1, 1) = 2.0;
  CHECK(shape_classify(distinct, s3).tag == StructureTag::Neither);

  Matrix skew = Matrix::Zero(3, 3);
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(shape_classify(skew, s3), InvalidInput);
}
