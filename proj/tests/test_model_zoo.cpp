#include <cmath>

#include "doctest.h"
#include "soliton_forge/errors.hpp"
#include "soliton_forge/model_zoo.hpp"
#include "test_support.hpp"

using namespace soliton_forge;
using test_support::max_abs;
using test_support::random_horizontal_unit;
using test_support::random_vector;

TEST_CASE("Tanno models: Phi-sectional curvatures 1, -4, -3") {
  const std::pair<ModelKind, double> expected[] = {
      {ModelKind::Sphere3, 1.0}, {ModelKind::SL2RCover, -4.0}, {ModelKind::Nil3, -3.0}};
  for (const auto& [kind, value] : expected) {
    const AlmostContactStructure acs = tanno_model(kind);
    for (int trial = 0; trial < 20; ++trial) {
      CHECK(std::abs(phi_sectional(acs, random_horizontal_unit(acs)) - value) < 1e-10);
    }
  }
}

TEST_CASE("Tanno models are K-contact Sasakian structures with contact scale 1") {
  for (ModelKind kind : {ModelKind::Sphere3, ModelKind::SL2RCover, ModelKind::Nil3}) {
    CAPTURE(model_name(kind));
    const AlmostContactStructure acs = tanno_model(kind);
    const ValidationReport report = validate(acs);
    for (const auto& r : report.residuals) CHECK(r.value < 1e-12);
    CHECK(killing_residual(acs) < 1e-14);
    const ContactScaleFit fit = fit_contact_scale(acs);
    CHECK(std::abs(fit.scale - 1.0) < 1e-14);
    CHECK(fit.residual < 1e-14);
    const StructureClass k = classify(acs);
    CHECK(k.tag == StructureTag::DeformedSasakian);
    CHECK(std::abs(k.b - 1.0) < 1e-10);
    const ReebGeodesicChecks g = geodesic_reeb_checks(acs);
    CHECK((g.geodesic && g.eta_invariant && g.phi_reeb_parallel && g.deta_reeb_zero));
  }
  CHECK_THROWS_AS(tanno_model(ModelKind::Cigar), InvalidInput);
}

TEST_CASE("Sphere3 with the trivial deformation has Rc(zeta, zeta) = 2") {
  const AlmostContactStructure s3 = tanno_model(ModelKind::Sphere3);
  CHECK(deformed_ricci(s3, {1, 1.0, 1.0}).reeb_ricci == 2.0);
  const CurvatureReport exact = curvature_frame(s3.frame);
  CHECK(std::abs(s3.zeta.dot(exact.ricci * s3.zeta) - 2.0) < 1e-14);
}

TEST_CASE("Einstein bases: transverse Ricci equals k times the transverse metric") {
  for (double k : {4.0, 1.0, 0.0, -2.0}) {
    const AlmostContactStructure base = einstein_base(1, k);
    const DeformedCurvature dc = deformed_ricci(base, {1, 1.0, 1.0});
    const Matrix proj = Matrix::Identity(3, 3) - base.zeta * base.eta.transpose();
    CHECK(max_abs(dc.transverse_ricci - k * proj.transpose() * proj) < 1e-13);
  }
  for (int n : {2, 3}) {
    const AlmostContactStructure base = einstein_base(n, 0.0);
    CHECK(base.frame.dim() == 2 * n + 1);
    CHECK(validate(base).ok());
    CHECK(classify(base).b == doctest::Approx(1.0));
    const DeformedCurvature dc = deformed_ricci(base, {1, 1.0, 1.0});
    CHECK(max_abs(dc.transverse_ricci) < 1e-13);
    CHECK(max_abs(dc.ricci - curvature_frame(base.frame).ricci) < 1e-13);
  }
  CHECK_THROWS_AS(einstein_base(2, 1.0), Unsupported);
  CHECK_THROWS_AS(einstein_base(0, 1.0), InvalidInput);
}

TEST_CASE("round sphere hypersurface") {
  for (double r : {1.0, 2.0, 0.5}) {
    CAPTURE(r);
    const HypersurfaceModel model = round_sphere_hypersurface(r);
    CHECK(validate(model.structure).ok());
    // Gauss equation in flat C^2: K(X, Y) = g(LX, X) g(LY, Y) - g(LX, Y)^2 = 1 / r^2.
    const CurvatureReport report = curvature_frame(model.structure.frame);
    for (int trial = 0; trial < 10; ++trial) {
      CHECK(std::abs(report.sectional(random_vector(3), random_vector(3)) - 1.0 / (r * r)) < 1e-12);
    }
    const ShapeClass shape = shape_classify(model.shape_operator, model.structure);
    CHECK(shape.tag == StructureTag::DeformedSasakian);
    CHECK(shape.alpha == doctest::Approx(1.0 / r).epsilon(1e-14));
    CHECK(std::abs(shape.beta) < 1e-14);
    const StructureClass k = classify(model.structure);
    CHECK(k.tag == StructureTag::DeformedSasakian);
    CHECK(k.b == doctest::Approx(1.0 / r).epsilon(1e-12));
    CHECK(fit_contact_scale(model.structure).scale == doctest::Approx(1.0 / r).epsilon(1e-12));

    // Equals the (r, r) deformation of the Sphere3 model componentwise.
    const AlmostContactStructure d = hf_deform(tanno_model(ModelKind::Sphere3), {1, r, r});
    CHECK(max_abs(d.frame.metric() - model.structure.frame.metric()) < 1e-14);
    CHECK(max_abs(d.zeta - model.structure.zeta) < 1e-14);
    CHECK(max_abs(d.eta - model.structure.eta) < 1e-14);
    CHECK(max_abs(d.phi - model.structure.phi) < 1e-14);
  }
  CHECK_THROWS_AS(round_sphere_hypersurface(0.0), InvalidInput);
}

TEST_CASE("model names") {
  for (const char* name : {"sphere3", "sl2r", "nil3", "gaussian", "cigar", "hopf-hypersurface"}) {
    CHECK(model_name(parse_model_name(name).kind) == name);
  }
  CHECK_THROWS_AS(parse_model_name("torus"), InvalidInput);
  CHECK_FALSE(is_almost_contact_model(ModelKind::GaussianSoliton));
  CHECK(is_almost_contact_model(ModelKind::Nil3));
}

TEST_CASE("Gaussian and cigar charts") {
  const SolitonChart g = gaussian_soliton(4, 1.0);
  CHECK(g.chart.dim == 4);
  const Vector x = random_vector(4);
  CHECK(g.chart.scalar_field_at(x) == doctest::Approx(0.5 * x.squaredNorm()));
  const Matrix j = g.complex_structure(x);
  CHECK(max_abs(j * j + Matrix::Identity(4, 4)) == 0.0);
  CHECK_THROWS_AS(gaussian_soliton(3, 1.0), InvalidInput);

  const SolitonChart c = cigar_soliton();
  CHECK(c.lambda == 0.0);
  CHECK(c.chart.scalar_field_at(Vector::Zero(2)) == 0.0);
}
