#include "soliton_forge/almost_contact.hpp"

#include <algorithm>
#include <cmath>

#include "soliton_forge/errors.hpp"

namespace soliton_forge {
namespace {

void require_shapes(const AlmostContactStructure& acs) {
  const int n = acs.frame.dim();
  if (acs.zeta.size() != n || acs.eta.size() != n || acs.phi.rows() != n || acs.phi.cols() != n) {
    throw InvalidInput("almost contact structure: zeta, eta, phi do not match the frame dimension");
  }
  if (n % 2 == 0) throw InvalidInput("almost contact structure requires an odd frame dimension");
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// nabla_x y for frame-constant fields.
Vector covariant(const Tensor3& gamma, const Vector& x, const Vector& y) {
  const int n = gamma.dim();
  Vector out = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (x(i) == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (y(j) == 0.0) continue;
      for (int k = 0; k < n; ++k) out(k) += x(i) * y(j) * gamma(k, i, j);
    }
  }
  return out;
}

Matrix d_eta_with(const Tensor3& gamma, const Vector& eta) {
  const int n = gamma.dim();
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += eta(k) * (gamma(k, i, j) - gamma(k, j, i));
      out(i, j) = -0.5 * sum;
    }
  return out;
}

}  // namespace

bool ValidationReport::ok() const {
  return std::all_of(residuals.begin(), residuals.end(),
                     [&](const NamedResidual& r) { return r.value <= tolerance; });
}

double ValidationReport::value(const std::string& name) const {
  for (const auto& r : residuals)
    if (r.name == name) return r.value;
  throw InvalidInput("validation report has no residual named " + name);
}

std::vector<std::string> ValidationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& r : residuals)
    if (!(r.value <= tolerance)) out.push_back(r.name);
  return out;
}

ValidationReport validate(const AlmostContactStructure& acs, double tolerance) {
  require_shapes(acs);
  const int n = acs.frame.dim();
  const Matrix& g = acs.frame.metric();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix zeta_eta = acs.zeta * acs.eta.transpose();

  ValidationReport report;
  report.tolerance = tolerance;
  report.residuals = {
      {"eta_zeta", std::abs(acs.eta.dot(acs.zeta) - 1.0)},
      {"phi_squared", max_abs(acs.phi * acs.phi + id - zeta_eta)},
      {"metric_compatibility",
       max_abs(acs.phi.transpose() * g * acs.phi - (g - acs.eta * acs.eta.transpose()))},
      {"zeta_unit", std::abs(acs.frame.inner(acs.zeta, acs.zeta) - 1.0)},
      {"phi_zeta", max_abs(acs.phi * acs.zeta)},
      {"eta_phi", max_abs(acs.eta.transpose() * acs.phi)},
  };
  return report;
}

AlmostContactStructure hf_deform(const AlmostContactStructure& acs, const DeformationParams& p) {
  require_shapes(acs);
  if (p.sign != 1 && p.sign != -1) throw InvalidInput("deformation sign must be +1 or -1");
  if (!(p.H > 0.0) || !(p.F > 0.0)) throw InvalidInput("deformation requires H > 0 and F > 0");

  const Matrix g = p.F * p.F * acs.frame.metric() +
                   (p.H * p.H - p.F * p.F) * acs.eta * acs.eta.transpose();
  AlmostContactStructure out{acs.frame.with_metric(0.5 * (g + g.transpose())), acs.zeta / p.H,
                             acs.eta * p.H, p.sign * acs.phi, std::nullopt};
  if (acs.contact_scale) out.contact_scale = p.sign * *acs.contact_scale * p.H / (p.F * p.F);
  return out;
}

Matrix d_eta(const AlmostContactStructure& acs) {
  require_shapes(acs);
  return d_eta_with(levi_civita_frame(acs.frame), acs.eta);
}

Matrix nabla_zeta(const AlmostContactStructure& acs) {
  require_shapes(acs);
  const int n = acs.frame.dim();
  const Tensor3 gamma = levi_civita_frame(acs.frame);
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) out.col(i) = covariant(gamma, Vector::Unit(n, i), acs.zeta);
  return out;
}

Matrix lie_derivative_metric(const AlmostContactStructure& acs) {
  const Matrix grad = nabla_zeta(acs);
  const Matrix lowered = acs.frame.metric() * grad;  // lowered(j, i) = g(nabla_i zeta, e_j)
  return lowered + lowered.transpose();
}

Matrix horizontal_basis(const AlmostContactStructure& acs) {
  require_shapes(acs);
  const int n = acs.frame.dim();
  std::vector<Vector> basis;
  for (int i = 0; i < n && static_cast<int>(basis.size()) < n - 1; ++i) {
    Vector v = Vector::Unit(n, i) - acs.eta(i) * acs.zeta;
    for (const Vector& b : basis) v -= acs.frame.inner(b, v) * b;
    const double len = acs.frame.norm(v);
    if (len > 1e-8) basis.push_back(v / len);
  }
  Matrix out(n, static_cast<int>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c) out.col(static_cast<int>(c)) = basis[c];
  return out;
}

ContactScaleFit fit_contact_scale(const AlmostContactStructure& acs) {
  const Matrix h = horizontal_basis(acs);
  const Matrix target = h.transpose() * d_eta(acs) * h;
  const Matrix model = h.transpose() * acs.frame.metric() * acs.phi * h;
  const double denom = model.squaredNorm();
  ContactScaleFit fit;
  fit.scale = denom > 0.0 ? target.cwiseProduct(model).sum() / denom : 0.0;
  fit.residual = max_abs(target - fit.scale * model);
  return fit;
}

double bundle_like_residual(const AlmostContactStructure& acs) {
  const Matrix h = horizontal_basis(acs);
  return max_abs(h.transpose() * lie_derivative_metric(acs) * h);
}

double killing_residual(const AlmostContactStructure& acs) {
  return max_abs(lie_derivative_metric(acs));
}

ATensorReport a_tensor_report(const AlmostContactStructure& acs) {
  require_shapes(acs);
  if (bundle_like_residual(acs) > 1e-10) {
    throw PreconditionError(
        "A-tensor on the Reeb field needs a bundle-like metric: the transverse metric must be "
        "invariant along the leaves of the zeta-foliation");
  }
  const Tensor3 gamma = levi_civita_frame(acs.frame);
  const Matrix deta = d_eta_with(gamma, acs.eta);
  ATensorReport report;
  report.horizontal = horizontal_basis(acs);
  const int m = static_cast<int>(report.horizontal.cols());
  report.a_zeta = Matrix(acs.frame.dim(), m);

  double anti = 0.0, sym = 0.0;
  for (int a = 0; a < m; ++a) {
    const Vector x = report.horizontal.col(a);
    const Vector grad = covariant(gamma, x, acs.zeta);
    report.a_zeta.col(a) = grad - acs.eta.dot(grad) * acs.zeta;
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const Vector x = report.horizontal.col(a);
      const Vector y = report.horizontal.col(b);
      const double deta_xy = x.dot(deta * y);
      const double a_zeta_y = acs.frame.inner(report.a_zeta.col(a), y);
      const Vector a_xy = acs.eta.dot(covariant(gamma, x, y)) * acs.zeta;
      const double zeta_a_xy = acs.frame.inner(acs.zeta, a_xy);
      report.reeb_identity = std::max(report.reeb_identity, std::abs(a_zeta_y - deta_xy));
      report.bracket_identity = std::max(report.bracket_identity, std::abs(zeta_a_xy + deta_xy));
      anti = std::max(anti, std::abs(a_zeta_y + zeta_a_xy));
      sym = std::max(sym, std::abs(a_zeta_y - zeta_a_xy));
    }
  report.antisymmetry = anti;
  report.closing_sign = anti <= sym ? -1 : 1;
  return report;
}

Matrix a_tensor_on_reeb(const AlmostContactStructure& acs) { return a_tensor_report(acs).a_zeta; }

ReebGeodesicChecks geodesic_reeb_checks(const AlmostContactStructure& acs, double tolerance) {
  require_shapes(acs);
  const int n = acs.frame.dim();
  const Tensor3 gamma = levi_civita_frame(acs.frame);

  const double geodesic = acs.frame.norm(covariant(gamma, acs.zeta, acs.zeta));

  double lie_eta = 0.0;
  for (int j = 0; j < n; ++j) {
    lie_eta = std::max(lie_eta, std::abs(acs.eta.dot(acs.frame.bracket(acs.zeta, Vector::Unit(n, j)))));
  }

  const Tensor3 dphi = covariant_derivative_endomorphism(acs.frame, gamma, acs.phi);
  Vector phi_reeb = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) phi_reeb(m) += acs.zeta(i) * acs.zeta(j) * dphi(i, j, m);

  const Vector deta_reeb = acs.zeta.transpose() * d_eta_with(gamma, acs.eta);

  ReebGeodesicChecks out;
  out.residuals[0] = geodesic;
  out.residuals[1] = lie_eta;
  out.residuals[2] = phi_reeb.cwiseAbs().maxCoeff();
  out.residuals[3] = deta_reeb.cwiseAbs().maxCoeff();
  out.geodesic = out.residuals[0] <= tolerance;
  out.eta_invariant = out.residuals[1] <= tolerance;
  out.phi_reeb_parallel = out.residuals[2] <= tolerance;
  out.deta_reeb_zero = out.residuals[3] <= tolerance;
  out.consistent = out.geodesic == out.eta_invariant && out.geodesic == out.phi_reeb_parallel &&
                   out.geodesic == out.deta_reeb_zero;
  out.inconclusive = !out.consistent;
  return out;
}

std::string to_string(StructureTag tag) {
  switch (tag) {
    case StructureTag::DeformedSasakian: return "DeformedSasakian";
    case StructureTag::ProductKahler: return "ProductKahler";
    case StructureTag::Neither: return "Neither";
  }
  return "Neither";
}

StructureClass classify(const AlmostContactStructure& acs, double tolerance) {
  require_shapes(acs);
  const int n = acs.frame.dim();
  const Matrix& g = acs.frame.metric();
  const Tensor3 gamma = levi_civita_frame(acs.frame);
  const Tensor3 dphi = covariant_derivative_endomorphism(acs.frame, gamma, acs.phi);

  // model(i, j) = g(e_i, e_j) zeta - eta(e_j) e_i
  auto model = [&](int i, int j, int m) {
    return g(i, j) * acs.zeta(m) - acs.eta(j) * (m == i ? 1.0 : 0.0);
  };
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) {
        num += dphi(i, j, m) * model(i, j, m);
        den += model(i, j, m) * model(i, j, m);
      }
  StructureClass out;
  out.b = den > 0.0 ? num / den : 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) {
        out.residual = std::max(out.residual, std::abs(dphi(i, j, m) - out.b * model(i, j, m)));
      }
  if (out.residual < tolerance) {
    out.tag = std::abs(out.b) > tolerance ? StructureTag::DeformedSasakian
                                           : StructureTag::ProductKahler;
    if (out.tag == StructureTag::ProductKahler) out.b = 0.0;
  } else {
    out.tag = StructureTag::Neither;
  }
  return out;
}

double phi_sectional(const AlmostContactStructure& acs, const Vector& x) {
  require_shapes(acs);
  if (x.size() != acs.frame.dim()) throw InvalidInput("phi_sectional: vector dimension mismatch");
  if (std::abs(acs.eta.dot(x)) > 1e-10) throw InvalidInput("phi_sectional: X is not horizontal");
  if (std::abs(acs.frame.norm(x) - 1.0) > 1e-10) throw InvalidInput("phi_sectional: X is not unit");
  const Vector phi_x = acs.phi * x;
  if (acs.frame.norm(phi_x) < 1e-10) throw InvalidInput("phi_sectional: Phi X vanishes (degenerate plane)");
  return curvature_frame(acs.frame).sectional(x, phi_x);
}

double DeformedCurvature::horizontal_sectional(const Vector& x, const Vector& y,
                                               SectionalReading reading) const {
  // x, y are g*-orthonormal and horizontal, so x / |x|_g and y / |y|_g are g-orthonormal
  // and |x|_g = 1 / F.
  const double x_len = std::sqrt(x.dot(original.metric * x));
  const double y_len = std::sqrt(y.dot(original.metric * y));
  const Vector xs = x / x_len;
  const Vector ys = y / y_len;
  const double inv_f2 = x_len * y_len;
  const double contact = xs.dot(original.metric * deformed.phi * ys);
  const double k_perp = original.sectional(xs, ys) + 3.0 * transverse_a2 * contact * contact;
  const double phi_term = x.dot(deformed.frame.metric() * deformed.phi * y);
  const double base = reading == SectionalReading::PlaneOnly ? k_perp * inv_f2 : k_perp;
  return base - 3.0 * kappa2 * phi_term * phi_term;
}

DeformedCurvature deformed_ricci(const AlmostContactStructure& acs, const DeformationParams& p) {
  require_shapes(acs);
  if (!acs.contact_scale) {
    throw PreconditionError("deformed_ricci needs a (deformed) contact structure: contact_scale missing");
  }
  if (killing_residual(acs) > 1e-10) {
    throw PreconditionError(
        "deformed_ricci needs a K-contact input: zeta must be Killing so that the foliation it "
        "induces is Riemannian");
  }
  const int n = acs.frame.dim();
  const double a = *acs.contact_scale;

  DeformedCurvature out;
  out.deformed = hf_deform(acs, p);
  out.original = curvature_frame(acs.frame);
  out.transverse_a2 = a * a;
  out.kappa2 = a * a * p.H * p.H / std::pow(p.F, 4);

  const Matrix& g = acs.frame.metric();
  const Matrix proj = Matrix::Identity(n, n) - acs.zeta * acs.eta.transpose();  // columns h_i
  const Matrix g_hh = proj.transpose() * g * proj;
  out.transverse_ricci = proj.transpose() * out.original.ricci * proj + 2.0 * a * a * g_hh;

  out.reeb_ricci = out.kappa2 * (n - 1);
  out.reeb_sectional = out.kappa2;
  out.ricci = out.transverse_ricci - 2.0 * out.kappa2 * p.F * p.F * g_hh +
              p.H * p.H * out.reeb_ricci * acs.eta * acs.eta.transpose();
  out.scalar = out.deformed.frame.metric_inverse().cwiseProduct(out.ricci).sum();
  return out;
}

ShapeClass shape_classify(const Matrix& shape_operator, const AlmostContactStructure& acs,
                          double tolerance) {
  require_shapes(acs);
  const int n = acs.frame.dim();
  if (shape_operator.rows() != n || shape_operator.cols() != n) {
    throw InvalidInput("shape_classify: shape operator has the wrong size");
  }
  const Matrix lowered = acs.frame.metric() * shape_operator;
  if (max_abs(lowered - lowered.transpose()) > 1e-10 * std::max(1.0, max_abs(lowered))) {
    throw InvalidInput("shape_classify: shape operator is not self-adjoint");
  }
  const Matrix id = Matrix::Identity(n, n);
  const Matrix reeb = acs.zeta * acs.eta.transpose();
  Eigen::Matrix2d normal;
  normal << id.squaredNorm(), id.cwiseProduct(reeb).sum(), id.cwiseProduct(reeb).sum(),
      reeb.squaredNorm();
  const Eigen::Vector2d rhs(shape_operator.cwiseProduct(id).sum(),
                            shape_operator.cwiseProduct(reeb).sum());
  const Eigen::Vector2d coef = normal.ldlt().solve(rhs);

  ShapeClass out;
  out.alpha = coef(0);
  out.beta = coef(1);
  out.residual = max_abs(shape_operator - out.alpha * id - out.beta * reeb);
  if (out.residual < tolerance) {
    out.tag = std::abs(out.alpha) > tolerance ? StructureTag::DeformedSasakian
                                               : StructureTag::ProductKahler;
  }
  return out;
}

}  // namespace soliton_forge
