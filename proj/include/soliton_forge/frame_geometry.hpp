#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>

#include "soliton_forge/tensor.hpp"

namespace soliton_forge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A left-invariant frame e_0..e_{n-1} on a Lie group together with a constant
/// frame metric. Structure constants follow [e_i, e_j] = sum_k c(k, i, j) e_k.
///
/// The constructor checks antisymmetry, the Jacobi identity (to 1e-12) and
/// positive-definiteness of the metric; any failure throws InvalidInput.
class StructureFrame {
 public:
  /// Empty zero-dimensional frame (placeholder for default-constructed aggregates).
  StructureFrame() = default;
  StructureFrame(Tensor3 structure_constants, Matrix metric);

  /// Commutative frame (flat torus / Euclidean space) with the given metric.
  static StructureFrame abelian(const Matrix& metric);

  int dim() const { return structure_constants_.dim(); }
  const Tensor3& structure_constants() const { return structure_constants_; }
  const Matrix& metric() const { return metric_; }
  const Matrix& metric_inverse() const { return metric_inverse_; }

  /// Same Lie algebra, different frame metric.
  StructureFrame with_metric(Matrix metric) const;

  /// [x, y] for frame-coordinate vectors.
  Vector bracket(const Vector& x, const Vector& y) const;
  /// Matrix of ad_x in the frame: (ad_x)(k, b) = sum_a x_a c(k, a, b).
  Matrix ad(const Vector& x) const;

  double inner(const Vector& x, const Vector& y) const { return x.dot(metric_ * y); }
  double norm(const Vector& x) const;

  /// Largest |Jacobiator| component.
  double jacobi_residual() const;

 private:
  Tensor3 structure_constants_;
  Matrix metric_;
  Matrix metric_inverse_;
};

/// Coordinate chart: a metric field and optionally a scalar potential.
struct ChartMetric {
  int dim = 0;
  std::function<Matrix(const Vector&)> metric_at;
  std::function<double(const Vector&)> scalar_field_at;  // may be empty
};

/// Riemann tensor in the convention riemann(i, j, k, l) = g(R(e_i, e_j) e_k, e_l)
/// with R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]; ricci(j, k) = g^{il} riemann(i, j, k, l).
struct CurvatureReport {
  Tensor4 riemann;
  Matrix ricci;
  double scalar = 0.0;
  std::map<std::string, double> residual_norms;
  Matrix metric;  // basis in which the components are expressed

  /// Sectional curvature of span{x, y}; throws InvalidInput on a degenerate plane.
  double sectional(const Vector& x, const Vector& y) const;
  /// Rm(x, y, z, w) on arbitrary vectors.
  double riemann_form(const Vector& x, const Vector& y, const Vector& z, const Vector& w) const;
};

/// Christoffel symbols christoffel(k, i, j) = Gamma^k_ij with nabla_{e_i} e_j = Gamma^k_ij e_k.
Tensor3 levi_civita_frame(const StructureFrame& frame);

/// Largest violations of torsion-freeness and metric compatibility of `gamma`.
struct ConnectionResiduals {
  double torsion = 0.0;
  double metric = 0.0;
};
ConnectionResiduals connection_residuals(const StructureFrame& frame, const Tensor3& gamma);

/// Exact curvature of a left-invariant metric. Residuals reported:
/// "bianchi1", "ricci_trace", "scalar_trace", "pair_symmetry".
CurvatureReport curvature_frame(const StructureFrame& frame);

/// (nabla_{e_i} T)(e_j) for a frame-constant endomorphism T; out(i, j, m) is the
/// e_m component. Equals the commutator [Gamma_i, T] with (Gamma_i)(m, k) = Gamma^m_ik.
Tensor3 covariant_derivative_endomorphism(const StructureFrame& frame, const Tensor3& gamma,
                                          const Matrix& endomorphism);

/// Step and stencil order for finite differences (order 2, 4, 6 or 8).
struct FdOptions {
  double step = 1e-3;
  int order = 4;
};

/// Metric, inverse, first and second coordinate derivatives, and Christoffel
/// symbols at a point, all from central differences of the chart metric.
struct ChartJet {
  Matrix g;
  Matrix g_inv;
  std::vector<Matrix> dg;                // dg[a] = d_a g
  std::vector<std::vector<Matrix>> ddg;  // ddg[a][b] = d_a d_b g
  Tensor3 christoffel;                   // Gamma^k_ij
};
ChartJet chart_jet(const ChartMetric& chart, const Vector& point, const FdOptions& options);

/// Independent curvature from a coordinate chart by central differences.
/// Residuals reported: "antisymmetry" (R_ijkl + R_jikl), "pair_symmetry"
/// (R_ijkl - R_klij), "bianchi1". Throws DegenerateChart when the metric is
/// not positive-definite at a stencil point.
CurvatureReport fd_curvature_oracle(const ChartMetric& chart, const Vector& point, double step);
CurvatureReport fd_curvature_oracle(const ChartMetric& chart, const Vector& point,
                                    const FdOptions& options);

/// Maurer-Cartan coframe of the frame's Lie group in exponential coordinates:
/// theta = Psi(x) dx with Psi(x) = sum_k (-ad_x)^k / (k+1)!. Left-invariant
/// vector field e_a has coordinate components column a of Psi(x)^{-1}.
Matrix group_coframe(const StructureFrame& frame, const Vector& x);

/// Exponential-coordinate chart of the left-invariant metric near the identity.
ChartMetric group_chart(const StructureFrame& frame);

}  // namespace soliton_forge
