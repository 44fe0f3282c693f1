#pragma once

#include <optional>
#include <string>
#include <vector>

#include "soliton_forge/frame_geometry.hpp"

namespace soliton_forge {

/// (zeta, eta, Phi, g) on an odd-dimensional frame. zeta and Phi act on frame
/// coordinates, eta is a row covector. contact_scale = a records
/// d eta(X, Y) = a g(X, Phi Y) when that relation holds.
///
/// Exterior derivative convention: 2 d eta(X, Y) = (nabla_X eta)(Y) - (nabla_Y eta)(X).
struct AlmostContactStructure {
  StructureFrame frame;
  Vector zeta;
  Vector eta;
  Matrix phi;
  std::optional<double> contact_scale;
};

struct NamedResidual {
  std::string name;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<NamedResidual> residuals;
  double tolerance = 1e-12;

  bool ok() const;
  double value(const std::string& name) const;
  std::vector<std::string> failures() const;
};

/// Residuals: eta_zeta, phi_squared, metric_compatibility, zeta_unit, phi_zeta, eta_phi.
/// Throws InvalidInput for even dimension or mismatched sizes.
ValidationReport validate(const AlmostContactStructure& acs, double tolerance = 1e-12);

struct DeformationParams {
  int sign = 1;  // +1 or -1
  double H = 1.0;
  double F = 1.0;
};

/// zeta* = zeta/H, eta* = H eta, Phi* = sign Phi, g* = F^2 g + (H^2 - F^2) eta (x) eta,
/// contact scale a* = sign a H / F^2.
AlmostContactStructure hf_deform(const AlmostContactStructure& acs, const DeformationParams& p);

/// d eta(e_i, e_j) in the frame.
Matrix d_eta(const AlmostContactStructure& acs);

/// Column i holds nabla_{e_i} zeta.
Matrix nabla_zeta(const AlmostContactStructure& acs);

/// (L_zeta g)(e_i, e_j).
Matrix lie_derivative_metric(const AlmostContactStructure& acs);

/// g-orthonormal basis of ker(eta), one vector per column.
Matrix horizontal_basis(const AlmostContactStructure& acs);

/// Best constant a in d eta(X, Y) = a g(X, Phi Y) over a horizontal basis, and its misfit.
struct ContactScaleFit {
  double scale = 0.0;
  double residual = 0.0;
};
ContactScaleFit fit_contact_scale(const AlmostContactStructure& acs);

/// Largest |(L_zeta g)(X, Y)| over horizontal basis pairs.
double bundle_like_residual(const AlmostContactStructure& acs);
/// Largest |(L_zeta g)(e_i, e_j)|.
double killing_residual(const AlmostContactStructure& acs);

/// O'Neill A-tensor pieces on the Reeb foliation. `a_zeta` column i is
/// A_{X_i} zeta for the horizontal basis X_i (frame components).
struct ATensorReport {
  Matrix horizontal;  // basis used, columns
  Matrix a_zeta;
  double reeb_identity = 0.0;    // max |g(A_X zeta, Y) - d eta(X, Y)|
  double bracket_identity = 0.0; // max |g(A_X Y, zeta) + d eta(X, Y)|
  double antisymmetry = 0.0;     // max |g(A_X zeta, Y) + g(zeta, A_X Y)|
  /// Sign s for which g(A_X zeta, Y) = s * g(zeta, A_X Y) closes; +1 or -1.
  int closing_sign = -1;
};

/// Requires g bundle-like w.r.t. the zeta-foliation; throws PreconditionError otherwise.
ATensorReport a_tensor_report(const AlmostContactStructure& acs);

/// The map X -> A_X zeta on the horizontal basis (columns, frame components).
Matrix a_tensor_on_reeb(const AlmostContactStructure& acs);

struct ReebGeodesicChecks {
  bool geodesic = false;           // nabla_zeta zeta = 0
  bool eta_invariant = false;      // L_zeta eta = 0
  bool phi_reeb_parallel = false;  // (nabla_zeta Phi) zeta = 0
  bool deta_reeb_zero = false;     // d eta(zeta, .) = 0
  double residuals[4] = {0, 0, 0, 0};
  bool consistent = true;
  bool inconclusive = false;  // disagreement within 100x of the tolerance
};
ReebGeodesicChecks geodesic_reeb_checks(const AlmostContactStructure& acs, double tolerance = 1e-10);

enum class StructureTag { DeformedSasakian, ProductKahler, Neither };
std::string to_string(StructureTag tag);

struct StructureClass {
  StructureTag tag = StructureTag::Neither;
  double b = 0.0;
  double residual = 0.0;
};

/// Least-squares fit of b in (nabla_X Phi)(Y) = b (g(X, Y) zeta - eta(Y) X) over
/// all frame pairs; residual is the sup-norm misfit.
StructureClass classify(const AlmostContactStructure& acs, double tolerance = 1e-8);

/// K(X, Phi X) for a unit horizontal X.
double phi_sectional(const AlmostContactStructure& acs, const Vector& x);

/// How K^perp(FX, FY) is normalised in the horizontal sectional formula.
enum class SectionalReading {
  PlaneOnly,    // K^perp depends on the plane only: K* = K^perp / F^2 - 3 k^2 g*(X, Phi* Y)^2
  VectorScaled  // K^perp evaluated in the scaled metric: K* = K^perp - 3 k^2 g*(X, Phi* Y)^2
};

/// Closed-form curvature of a +-(H, F) deformation of a K-contact structure.
/// kappa2 = a^2 H^2 / F^4 (a = contact scale).
struct DeformedCurvature {
  AlmostContactStructure deformed;
  double kappa2 = 0.0;
  double transverse_a2 = 0.0;  // a^2 of the undeformed structure
  Matrix ricci;             // Rc*(e_i, e_j)
  double scalar = 0.0;
  double reeb_ricci = 0.0;  // Rc*(zeta*, zeta*)
  double reeb_sectional = 0.0;  // K*(X, zeta*)
  Matrix transverse_ricci;  // Rc^perp(e_i, e_j) (horizontal projections of the frame)
  CurvatureReport original;

  /// K*(X, Y) for g*-orthonormal horizontal X, Y.
  double horizontal_sectional(const Vector& x, const Vector& y, SectionalReading reading) const;
};

/// Requires zeta Killing and contact_scale present; throws PreconditionError otherwise.
DeformedCurvature deformed_ricci(const AlmostContactStructure& acs, const DeformationParams& p);

struct ShapeClass {
  StructureTag tag = StructureTag::Neither;
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0;
};

/// Fits L = alpha Id + beta zeta (x) eta. Throws InvalidInput when L is not
/// g-self-adjoint.
ShapeClass shape_classify(const Matrix& shape_operator, const AlmostContactStructure& acs,
                          double tolerance = 1e-8);

}  // namespace soliton_forge
