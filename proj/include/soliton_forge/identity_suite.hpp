#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "soliton_forge/frame_geometry.hpp"
#include "soliton_forge/model_zoo.hpp"
#include "soliton_forge/soliton_ode.hpp"

namespace soliton_forge {

/// Metric-plus-potential given by a coordinate chart; f is chart.scalar_field_at.
/// Curvature comes from the finite-difference oracle with `inner` stencils; derivatives of
/// the scalar curvature use a second, `outer` stencil on top of it.
struct ChartSample {
  ChartMetric chart;
  std::function<Matrix(const Vector&)> complex_structure;  // optional, coordinate matrix of J
  FdOptions inner{2e-2, 8};
  FdOptions outer{5e-2, 8};
};

/// Cohomogeneity-one tube; sample points are tube-chart coordinates (t, x).
/// Curvature comes from the reduced formulas; t-derivatives of S use `t_step`.
struct TubeSample {
  WarpedProductMetric tube;
  double t_step = 1e-2;
};

struct SolitonSample {
  std::variant<ChartSample, TubeSample> geometry;
  double lambda = 0.0;
  std::vector<Vector> points;
  std::vector<int> components;  // connected-component label per point; empty: one component
};

/// Everything the identities need at one point, in a basis with Gram matrix g.
struct PointGeometry {
  Matrix g;
  double f = 0.0;
  Vector df;     // covector
  Matrix hess_f;  // Hess f(e_i, e_j)
  Matrix ricci;
  double S = 0.0;
  Vector dS;     // covector
  double lap_S = 0.0;
};

/// Evaluates the geometry at a sample point. `with_lap_S = false` skips the (expensive)
/// second derivatives of S and leaves lap_S = NaN.
PointGeometry evaluate_point(const SolitonSample& s, const Vector& point, bool with_lap_S = true);

/// sup over the sample points of |Rc + Hess f - lambda g| (largest orthonormal component).
double sample_soliton_residual(const SolitonSample& s);

struct IdentityOptions {
  double max_soliton_residual = 1e-6;  // precondition
};

struct IdentityReport {
  double soliton_residual = 0.0;
  double trace = 0.0;         // |S + Laplacian f - dim lambda|
  double bianchi = 0.0;       // |Rc(grad f) - dS / 2|
  double conservation = 0.0;  // std deviation of S + |grad f|^2 - 2 lambda f per component (max)
  double laplacian_S = 0.0;   // |Laplacian S + 2|Rc|^2 - <grad f, grad S> - 2 lambda S|
  std::vector<double> conservation_constants;  // mean per component
  double max() const;
};

/// The four trace/Bianchi consequences of Rc + Hess f = lambda g, as sup-norms over the
/// sample points. Throws PreconditionError when the soliton residual itself is too large.
IdentityReport soliton_identities(const SolitonSample& s, const IdentityOptions& options = {});

/// sup over the sample points of |L_{J grad f} g|. Throws Unsupported without a complex structure.
double killing_residual(const SolitonSample& s);

struct RectifiabilityOptions {
  double level_step = 1e-3;   // step of the projected flow tracing level sets
  int level_steps = 10;       // steps per direction
  double tolerance = 1e-5;    // conditions (i) and (ii)
  double parallel_tolerance = 1e-6;  // condition (iii), normalized wedge
  double critical_gradient = 1e-10;  // points with |grad f| below this are skipped
};

struct RectifiabilityReport {
  bool rectifiable = false;     // (i) |grad f| constant along level sets
  bool eigenvector = false;     // (ii) grad f is an eigenvector of Rc
  bool parallel = false;        // (iii) grad f parallel to grad S
  double level_variation = 0.0; // relative variation of |grad f| along traced level sets
  double eigen_residual = 0.0;  // |Rc(grad f) - mu grad f| / (|grad f| max(1, |Rc|))
  double wedge = 0.0;           // |df ^ dS| / (|df| |dS|)
  int skipped = 0;              // critical points excluded
  bool consistent = false;      // all three agree
};

/// The three equivalent rectifiability conditions, evaluated independently. Tubes are
/// evaluated on their coordinate chart.
RectifiabilityReport rectifiability_report(const SolitonSample& s, const RectifiabilityOptions& options = {});

struct TransnormalOptions {
  double cluster_tolerance = 1e-9;  // relative gap for "same level of f"
  double tolerance = 1e-5;          // scatter about the fit
  double segment_tolerance = 1e-3;  // relative gap of the f-segment length check
};

/// Two sample points on the same level of f with different values: proof of multi-valuedness.
struct Witness {
  std::size_t first = 0, second = 0;
  double f = 0.0, value_first = 0.0, value_second = 0.0;
};

struct FitTable {
  std::vector<double> f, b, a;  // level means: b = |grad f|^2, a = Laplacian f
};

struct TransnormalFit {
  FitTable table;
  double b_scatter = 0.0, a_scatter = 0.0;
  bool transnormal = false, isoparametric = false;
  std::optional<Witness> witness;
  /// int df / sqrt(b) between the lowest and highest regular level versus the length of a
  /// traced gradient line; present when the table has at least four levels.
  std::optional<double> segment_quadrature, segment_traced;
  bool segment_agrees = true;
};

struct TransnormalReport {
  std::vector<TransnormalFit> components;
  TransnormalFit global;  // all components pooled
};

/// Scatter of (f, |grad f|^2) and (f, Laplacian f) about monotone piecewise-cubic fits,
/// per component and pooled. The caller is expected to have passed rectifiability_report.
TransnormalReport transnormal_fit(const SolitonSample& s, const TransnormalOptions& options = {});

struct HessianSpectrum {
  std::vector<Vector> eigenvalues;  // ascending, per sample point
  double pair_deviation = 0.0;      // max |e_{2i} - e_{2i+1}|
  double slice_deviation = 0.0;     // max std deviation of each eigenvalue over a level of f
};

/// Eigenvalues of Hess f with respect to g (finite differences on the chart; tubes are
/// evaluated on their coordinate chart).
HessianSpectrum hessian_spectrum(const SolitonSample& s, double cluster_tolerance = 1e-9);

/// Chart view of a sample: tubes become their (t, x) chart with the block complex structure.
ChartSample as_chart(const SolitonSample& s);

/// Sample points on a tube: `slices` interior t-values, `per_slice` points x at each.
std::vector<Vector> tube_sample_points(const WarpedProductMetric& w, int slices, int per_slice,
                                       double x_radius = 0.3);

/// Points on `levels` spheres |x| = r (r evenly spaced over [r_min, r_max]), `per_level`
/// deterministic directions on each.
std::vector<Vector> radial_sample_points(int dim, double r_min, double r_max, int levels, int per_level);

/// Chart sample of a model soliton (metric, potential, complex structure, lambda).
SolitonSample chart_soliton_sample(const SolitonChart& model, std::vector<Vector> points,
                                   FdOptions inner = {2e-2, 8}, FdOptions outer = {5e-2, 8});

/// Tube sample of a solved soliton with `slices` x `per_slice` points.
SolitonSample tube_soliton_sample(const WarpedProductMetric& w, double lambda, int slices, int per_slice);

}  // namespace soliton_forge
