#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "soliton_forge/almost_contact.hpp"
#include "soliton_forge/interpolation.hpp"
#include "soliton_forge/ode.hpp"

namespace soliton_forge {

/// Constants of the Calabi-ansatz soliton ODE
///   d alpha / ds = k - lambda (2s + A) - 2n alpha / (2s + A) + B alpha
/// on [s_min, s_max]; the potential is f = B s + C.
struct SolitonProblem {
  double lambda = 0.0;
  double k = 0.0;
  int n = 1;
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double s_min = 0.0;
  double s_max = 1.0;
};

/// Throws InvalidInput unless n >= 1, s_max > s_min and 2s + A > 0 on (s_min, s_max).
void validate_problem(const SolitonProblem& p);

/// True when s_min lies on the singular line 2s + A = 0.
bool singular_start(const SolitonProblem& p);

/// Right-hand side of the alpha ODE. Throws DomainError when 2s + A <= 0.
double alpha_ode_rhs(double s, double alpha, const SolitonProblem& p);

/// d^2 alpha / ds^2 along a solution through (s, alpha).
double alpha_ode_second(double s, double alpha, const SolitonProblem& p);

/// Integrating-factor propagation of the linear alpha ODE from (s0, alpha0) to s1 by
/// adaptive Gauss-Kronrod quadrature. The factor is mu(s) = (2s + A)^n exp(-B s);
/// s0 may lie on the singular line (then alpha0 is ignored, mu(s0) = 0).
double closed_form_alpha(double s0, double alpha0, double s1, const SolitonProblem& p);

struct ZeroCrossing {
  double s_lo = 0.0;  // alpha > 0
  double s_hi = 0.0;  // alpha <= 0 (dense output)
};

/// Solution of the alpha ODE at the integrator nodes, with the closed-form values alongside.
struct AlphaProfile {
  std::vector<double> grid;
  std::vector<double> alpha;
  std::vector<double> alpha_prime;
  std::vector<double> alpha_second;
  std::vector<double> closed_form;
  double closed_form_gap = 0.0;  // sup |alpha - closed_form| over the grid
  bool singular_start = false;
  std::optional<ZeroCrossing> zero_crossing;  // profile truncated at the first alpha = 0
  OdeStats stats;
};

struct SolveOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  int min_nodes = 2048;          // max step = (s_max - s_min) / min_nodes
  double singular_band = 1e-3;   // closed form used within this distance of 2s + A = 0
  double crossing_width = 1e-8;  // bisection bracket for alpha -> 0
};

/// Integrates from s_min with alpha(s_min) = alpha_init. Throws EmptyProfile when alpha
/// is not positive immediately after s_min, InvalidInput for invalid problems (including a
/// nonzero alpha_init on the singular line).
AlphaProfile solve_alpha(const SolitonProblem& p, double alpha_init, const SolveOptions& options = {});

using ProfileFn = std::function<Jet(double)>;

/// g = dt^2 + H(t)^2 eta (x) eta + F(t)^2 g_perp over a fixed almost-contact base, with
/// potential f(t). Profiles return value and first two t-derivatives.
struct WarpedProductMetric {
  double t_min = 0.0;
  double t_max = 1.0;
  ProfileFn H, F, f;
  AlmostContactStructure base;
  /// Calabi tubes: s(t) and its inverse t(s). Empty otherwise.
  std::function<double(double)> s_of_t;
  std::function<double(double)> t_of_s;
};

/// Largest mismatch between the supplied derivatives and central differences of the
/// supplied values at `samples` interior points (step h).
double profile_self_consistency(const WarpedProductMetric& w, int samples = 50, double h = 1e-4);

/// Tube of the Calabi ansatz: t(s) = int ds / sqrt(alpha), H = sqrt(alpha),
/// F = sqrt(2s + A), f = B s + C, over einstein_base(n, k).
/// Throws PreconditionError when alpha vanishes in the interior of the profile.
WarpedProductMetric calabi_to_tube(const AlphaProfile& profile, const SolitonProblem& p);

struct ShapeProfile {
  double reeb = 0.0;        // H'/H
  double horizontal = 0.0;  // F'/F
  Matrix op;                // L in base-frame components
  double trace = 0.0;       // tr L = H'/H + 2m F'/F
  double trace_sq = 0.0;    // tr L^2
  double trace_prime = 0.0; // tr L'
  int m = 1;                // complex dimension of the base quotient
};
ShapeProfile shape_profile(const WarpedProductMetric& w, double t);

/// Ricci tensor of the tube at t: tangential part in base-frame components, the normal
/// component Rc(N, N) and the mixed components Rc(e_i, N).
struct TubeRicci {
  Matrix tangential;
  double normal = 0.0;
  Vector mixed;
  Matrix slice_metric;  // g_t in base-frame components
};
TubeRicci tube_ricci(const WarpedProductMetric& w, double t);

/// Scalar curvature and |Rc|^2 of the tube at t.
double tube_scalar(const TubeRicci& rc);
double tube_ricci_norm_sq(const TubeRicci& rc);

struct ResidualRow {
  double t = 0.0, s = 0.0;
  double R1 = 0.0, R2_zeta = 0.0, R2_horiz = 0.0, R3 = 0.0, R4 = 0.0;
};

struct SolitonResidual {
  std::vector<ResidualRow> rows;
  double R1 = 0.0, R2_zeta = 0.0, R2_horiz = 0.0, R3 = 0.0, R4 = 0.0;
  double max() const;
};

/// Interior t-grid t_i = t_min + i (t_max - t_min) / (points + 1), i = 1..points.
std::vector<double> interior_grid(double t_min, double t_max, int points);

/// Reduced soliton system on the tube:
///   R1 = |lambda - (Rc(N,N) + f'')|,
///   R2 = |Rc + f' g(L., .) - lambda g| on zeta (R2_zeta) and the horizontal block (R2_horiz),
///   R3 = |F F' - H|, R4 = |f' - B H|.
SolitonResidual soliton_residual(const WarpedProductMetric& w, const SolitonProblem& p, int points = 200);

enum class End { Lower, Upper };

enum class BoundaryKind { SmoothPoint, SmoothCircleCollapse, RegularBoundary, NotSmooth };
std::string to_string(BoundaryKind kind);

struct BoundaryReport {
  BoundaryKind kind = BoundaryKind::NotSmooth;
  std::string reason;
  double H = 0.0, F = 0.0, dH = 0.0, dF = 0.0;  // extrapolated limits
  double extrapolation_error = 0.0;
};

struct BoundaryOptions {
  double zero_tol = 1e-6;    // |H|, |F| below this count as collapsed
  double slope_tol = 1e-4;   // tolerance on |H'|, |F'| = 1 and F' = 0
  double max_error = 1e-6;   // Richardson error above this: not converged
};

BoundaryReport boundary_check(const WarpedProductMetric& w, End end, const BoundaryOptions& options = {});

/// Coordinate chart (t, x) of the tube: x are exponential coordinates of the base group and
/// g = dt^2 + Psi(x)^T g_t Psi(x). The potential is f(t).
ChartMetric tube_chart(const WarpedProductMetric& w);

/// Complex structure J N = -zeta / H, J Y = Phi Y + H eta(Y) N in tube-chart coordinates.
std::function<Matrix(const Vector&)> tube_complex_structure(const WarpedProductMetric& w);

/// Eigenvalues of Hess f on the tube at t from the closed forms: f'' (normal),
/// f' H'/H (Reeb), f' F'/F (horizontal, multiplicity 2m), sorted ascending.
Vector tube_hessian_eigenvalues(const WarpedProductMetric& w, double t);

}  // namespace soliton_forge
