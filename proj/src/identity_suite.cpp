#include "soliton_forge/identity_suite.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "soliton_forge/errors.hpp"
#include "soliton_forge/finite_difference.hpp"
#include "soliton_forge/parallel.hpp"

namespace soliton_forge {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------------------
// Chart evaluation helpers

double potential(const ChartMetric& chart, const Vector& x) {
  if (!chart.scalar_field_at) throw InvalidInput("chart sample has no potential");
  return chart.scalar_field_at(x);
}

Vector potential_gradient(const ChartMetric& chart, const Vector& x, const FdOptions& fd) {
  Vector df(chart.dim);
  for (int a = 0; a < chart.dim; ++a) {
    df(a) = fd::first_derivative(
        [&](int k) {
          Vector y = x;
          y(a) += k * fd.step;
          return potential(chart, y);
        },
        fd.step, fd.order);
  }
  return df;
}

// Coordinate Hessian of a scalar function by central differences.
template <class Fn>
Matrix coordinate_hessian(const Fn& fn, const Vector& x, int dim, const FdOptions& fd) {
  Matrix h(dim, dim);
  for (int a = 0; a < dim; ++a) {
    h(a, a) = fd::second_derivative(
        [&](int k) {
          Vector y = x;
          y(a) += k * fd.step;
          return fn(y);
        },
        fd.step, fd.order);
    for (int b = a + 1; b < dim; ++b) {
      h(a, b) = h(b, a) = fd::mixed_derivative(
          [&](int i, int j) {
            Vector y = x;
            y(a) += i * fd.step;
            y(b) += j * fd.step;
            return fn(y);
          },
          fd.step, fd.order);
    }
  }
  return h;
}

template <class Fn>
Vector coordinate_gradient(const Fn& fn, const Vector& x, int dim, const FdOptions& fd) {
  Vector d(dim);
  for (int a = 0; a < dim; ++a) {
    d(a) = fd::first_derivative(
        [&](int k) {
          Vector y = x;
          y(a) += k * fd.step;
          return fn(y);
        },
        fd.step, fd.order);
  }
  return d;
}

// Covariant Hessian from coordinate second derivatives: d_i d_j u - Gamma^k_ij d_k u.
Matrix covariant_hessian(const Matrix& second, const Vector& first, const Tensor3& gamma) {
  const int n = static_cast<int>(first.size());
  Matrix h = second;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) h(i, j) -= gamma(k, i, j) * first(k);
  return 0.5 * (h + h.transpose());
}

struct PotentialJet {
  Matrix g;
  double f = 0.0;
  Vector df;
  Matrix hess;
};

PotentialJet potential_jet(const ChartSample& cs, const Vector& x) {
  const ChartJet jet = chart_jet(cs.chart, x, cs.inner);
  PotentialJet out;
  out.g = jet.g;
  out.f = potential(cs.chart, x);
  out.df = potential_gradient(cs.chart, x, cs.inner);
  const Matrix second =
      coordinate_hessian([&](const Vector& y) { return potential(cs.chart, y); }, x, cs.chart.dim, cs.inner);
  out.hess = covariant_hessian(second, out.df, jet.christoffel);
  return out;
}

PointGeometry chart_point(const ChartSample& cs, const Vector& x, bool with_lap_S) {
  const int n = cs.chart.dim;
  if (x.size() != n) throw InvalidInput("sample point dimension does not match the chart");
  const ChartJet jet = chart_jet(cs.chart, x, cs.inner);
  const CurvatureReport curvature = fd_curvature_oracle(cs.chart, x, cs.inner);
  auto scalar = [&](const Vector& y) { return fd_curvature_oracle(cs.chart, y, cs.inner).scalar; };

  PointGeometry p;
  p.g = jet.g;
  p.f = potential(cs.chart, x);
  p.df = potential_gradient(cs.chart, x, cs.inner);
  const Matrix second = coordinate_hessian([&](const Vector& y) { return potential(cs.chart, y); }, x, n, cs.inner);
  p.hess_f = covariant_hessian(second, p.df, jet.christoffel);
  p.ricci = curvature.ricci;
  p.S = curvature.scalar;
  p.dS = coordinate_gradient(scalar, x, n, cs.outer);
  if (with_lap_S) {
    const Matrix second_S = coordinate_hessian(scalar, x, n, cs.outer);
    p.lap_S = jet.g_inv.cwiseProduct(covariant_hessian(second_S, p.dS, jet.christoffel)).sum();
  } else {
    p.lap_S = kNaN;
  }
  return p;
}

// Orthonormal frame of the tube at t: N, zeta*, horizontal basis.
PointGeometry tube_point(const TubeSample& ts, const Vector& q, bool with_lap_S) {
  const WarpedProductMetric& w = ts.tube;
  const double t = q(0);
  if (!(t > w.t_min && t < w.t_max)) throw DomainError("tube sample point outside (t_min, t_max)");
  const int d = w.base.frame.dim();
  const Jet H = w.H(t), F = w.F(t), f = w.f(t);
  const TubeRicci rc = tube_ricci(w, t);
  const ShapeProfile shape = shape_profile(w, t);
  const AlmostContactStructure slice = hf_deform(w.base, {1, H.value, F.value});
  Matrix basis(d, d);
  basis.col(0) = slice.zeta;
  basis.rightCols(d - 1) = horizontal_basis(slice);

  PointGeometry p;
  p.g = Matrix::Identity(d + 1, d + 1);
  p.f = f.value;
  p.df = Vector::Zero(d + 1);
  p.df(0) = f.d1;
  p.hess_f = Matrix::Zero(d + 1, d + 1);
  p.hess_f(0, 0) = f.d2;
  p.hess_f.bottomRightCorner(d, d) = f.d1 * basis.transpose() * rc.slice_metric * shape.op * basis;
  p.hess_f = 0.5 * (p.hess_f + p.hess_f.transpose());
  p.ricci = Matrix::Zero(d + 1, d + 1);
  p.ricci(0, 0) = rc.normal;
  p.ricci.block(1, 0, d, 1) = basis.transpose() * rc.mixed;
  p.ricci.block(0, 1, 1, d) = p.ricci.block(1, 0, d, 1).transpose();
  p.ricci.bottomRightCorner(d, d) = basis.transpose() * rc.tangential * basis;
  p.S = tube_scalar(rc);

  constexpr int order = 6;
  const double room = std::min(t - w.t_min, w.t_max - t) / 3.5;
  const double h = std::min(ts.t_step, room);
  auto scalar_at = [&](int k) { return tube_scalar(tube_ricci(w, t + k * h)); };
  const double dS = fd::first_derivative(scalar_at, h, order);
  p.dS = Vector::Zero(d + 1);
  p.dS(0) = dS;
  p.lap_S = with_lap_S ? fd::second_derivative(scalar_at, h, order) + shape.trace * dS : kNaN;
  return p;
}

// Components of a symmetric bilinear form in a g-orthonormal basis.
Matrix orthonormal_components(const Matrix& g, const Matrix& form) {
  const Eigen::LLT<Matrix> llt(g);
  const Matrix l_inv = llt.matrixL().solve(Matrix::Identity(g.rows(), g.cols()));
  return l_inv * form * l_inv.transpose();
}

std::vector<PointGeometry> evaluate_all(const SolitonSample& s, bool with_lap_S) {
  if (s.points.empty()) throw InvalidInput("soliton sample has no points");
  if (!s.components.empty() && s.components.size() != s.points.size()) {
    throw InvalidInput("component labels must match the sample points");
  }
  std::vector<PointGeometry> out(s.points.size());
  parallel_for(s.points.size(), [&](std::size_t i) { out[i] = evaluate_point(s, s.points[i], with_lap_S); });
  return out;
}

int component_of(const SolitonSample& s, std::size_t i) { return s.components.empty() ? 0 : s.components[i]; }

std::map<int, std::vector<std::size_t>> group_components(const SolitonSample& s) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < s.points.size(); ++i) groups[component_of(s, i)].push_back(i);
  return groups;
}

// Groups of indices whose f-values agree to `tolerance` (relative), in increasing f.
std::vector<std::vector<std::size_t>> level_clusters(std::vector<std::size_t> indices,
                                                     const std::vector<double>& f, double tolerance) {
  std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i : indices) {
    if (clusters.empty() ||
        f[i] - f[clusters.back().front()] > tolerance * std::max(1.0, std::abs(f[i]))) {
      clusters.emplace_back();
    }
    clusters.back().push_back(i);
  }
  return clusters;
}

double mean_of(const std::vector<std::size_t>& idx, const std::vector<double>& v) {
  double sum = 0.0;
  for (std::size_t i : idx) sum += v[i];
  return sum / static_cast<double>(idx.size());
}

double norm_dual(const Matrix& g_inv, const Vector& covector) {
  return std::sqrt(std::max(0.0, covector.dot(g_inv * covector)));
}

// Unit-speed gradient line of f: one RK4 step.
Vector gradient_step(const ChartSample& cs, const Vector& y, double h) {
  auto direction = [&](const Vector& x) {
    const Matrix g = cs.chart.metric_at(x);
    const Vector grad = g.ldlt().solve(potential_gradient(cs.chart, x, cs.inner));
    return Vector(grad / std::sqrt(grad.dot(g * grad)));
  };
  const Vector k1 = direction(y);
  const Vector k2 = direction(y + 0.5 * h * k1);
  const Vector k3 = direction(y + 0.5 * h * k2);
  const Vector k4 = direction(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Length of the gradient line from `start` up to the level f = target.
double traced_gradient_length(const ChartSample& cs, const Vector& start, double target) {
  constexpr double step = 1e-2;
  Vector y = start;
  double length = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const Vector next = gradient_step(cs, y, step);
    if (potential(cs.chart, next) < target) {
      y = next;
      length += step;
      continue;
    }
    double lo = 0.0, hi = step;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (lo + hi);
      (potential(cs.chart, gradient_step(cs, y, mid)) < target ? lo : hi) = mid;
    }
    return length + 0.5 * (lo + hi);
  }
  throw SolverError("gradient line did not reach the target level");
}

TransnormalFit fit_levels(const SolitonSample& s, const ChartSample& cs, const std::vector<std::size_t>& indices,
                          const std::vector<double>& f, const std::vector<double>& b,
                          const std::vector<double>& a, const TransnormalOptions& options, bool segment) {
  TransnormalFit fit;
  const auto clusters = level_clusters(indices, f, options.cluster_tolerance);
  double worst_spread = -1.0;
  for (const auto& cluster : clusters) {
    const double fm = mean_of(cluster, f), bm = mean_of(cluster, b), am = mean_of(cluster, a);
    fit.table.f.push_back(fm);
    fit.table.b.push_back(bm);
    fit.table.a.push_back(am);
    auto [lo, hi] = std::minmax_element(cluster.begin(), cluster.end(),
                                        [&](std::size_t x, std::size_t y) { return b[x] < b[y]; });
    for (std::size_t i : cluster) {
      fit.b_scatter = std::max(fit.b_scatter, std::abs(b[i] - bm) / std::max(1.0, std::abs(bm)));
      fit.a_scatter = std::max(fit.a_scatter, std::abs(a[i] - am) / std::max(1.0, std::abs(am)));
    }
    const double spread = b[*hi] - b[*lo];
    if (cluster.size() > 1 && spread > worst_spread) {
      worst_spread = spread;
      fit.witness = Witness{*lo, *hi, fm, b[*lo], b[*hi]};
    }
  }
  fit.transnormal = fit.b_scatter < options.tolerance;
  fit.isoparametric = fit.transnormal && fit.a_scatter < options.tolerance;
  if (fit.transnormal) fit.witness.reset();

  // f-segment: d = int df / sqrt(b) against the traced gradient line.
  if (segment && fit.transnormal && fit.table.f.size() >= 4) {
    std::size_t first = 0;
    while (first < fit.table.f.size() && !(fit.table.b[first] > 1e-12)) ++first;
    if (first + 3 < fit.table.f.size()) {
      std::vector<double> fx(fit.table.f.begin() + first, fit.table.f.end());
      std::vector<double> bx(fit.table.b.begin() + first, fit.table.b.end());
      const double lo = fx.front(), hi = fx.back();
      const boost::math::interpolators::pchip<std::vector<double>> interp(std::move(fx), std::move(bx));
      const double quadrature = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          [&](double v) { return 1.0 / std::sqrt(interp(v)); }, lo, hi, 10, 1e-12);
      const auto start = level_clusters(indices, f, options.cluster_tolerance)[first].front();
      const double traced = traced_gradient_length(cs, s.points[start], hi);
      fit.segment_quadrature = quadrature;
      fit.segment_traced = traced;
      fit.segment_agrees = std::abs(quadrature - traced) <= options.segment_tolerance * std::max(traced, 1e-12);
    }
  }
  return fit;
}

SolitonSample chart_view(const SolitonSample& s) {
  SolitonSample out = s;
  out.geometry = as_chart(s);
  return out;
}

}  // namespace

ChartSample as_chart(const SolitonSample& s) {
  if (const auto* cs = std::get_if<ChartSample>(&s.geometry)) return *cs;
  const TubeSample& ts = std::get<TubeSample>(s.geometry);
  ChartSample cs;
  cs.chart = tube_chart(ts.tube);
  cs.complex_structure = tube_complex_structure(ts.tube);
  // The tube metric carries interpolation rounding; wider stencils keep it below truncation.
  cs.inner = {2e-2, 8};
  cs.outer = {3e-2, 6};
  return cs;
}

PointGeometry evaluate_point(const SolitonSample& s, const Vector& point, bool with_lap_S) {
  if (const auto* cs = std::get_if<ChartSample>(&s.geometry)) return chart_point(*cs, point, with_lap_S);
  return tube_point(std::get<TubeSample>(s.geometry), point, with_lap_S);
}

double sample_soliton_residual(const SolitonSample& s) {
  double worst = 0.0;
  for (const PointGeometry& p : evaluate_all(s, false)) {
    const Matrix m = orthonormal_components(p.g, p.ricci + p.hess_f - s.lambda * p.g);
    worst = std::max(worst, m.cwiseAbs().maxCoeff());
  }
  return worst;
}

double IdentityReport::max() const { return std::max({trace, bianchi, conservation, laplacian_S}); }

IdentityReport soliton_identities(const SolitonSample& s, const IdentityOptions& options) {
  const std::vector<PointGeometry> points = evaluate_all(s, true);
  IdentityReport report;
  std::vector<double> conserved(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointGeometry& p = points[i];
    const int dim = static_cast<int>(p.g.rows());
    const Matrix g_inv = p.g.inverse();
    const Vector grad = g_inv * p.df;
    const Matrix m = orthonormal_components(p.g, p.ricci + p.hess_f - s.lambda * p.g);
    report.soliton_residual = std::max(report.soliton_residual, m.cwiseAbs().maxCoeff());

    const double lap_f = g_inv.cwiseProduct(p.hess_f).sum();
    report.trace = std::max(report.trace, std::abs(p.S + lap_f - dim * s.lambda));
    const Vector bianchi = p.ricci * grad - 0.5 * p.dS;
    report.bianchi = std::max(report.bianchi, norm_dual(g_inv, bianchi));
    const Matrix rc_up = g_inv * p.ricci;
    const double rc_sq = (rc_up * rc_up).trace();
    report.laplacian_S = std::max(
        report.laplacian_S, std::abs(p.lap_S + 2.0 * rc_sq - p.dS.dot(grad) - 2.0 * s.lambda * p.S));
    conserved[i] = p.S + p.df.dot(grad) - 2.0 * s.lambda * p.f;
  }
  for (const auto& [label, idx] : group_components(s)) {
    const double mean = mean_of(idx, conserved);
    double var = 0.0;
    for (std::size_t i : idx) var += (conserved[i] - mean) * (conserved[i] - mean);
    report.conservation = std::max(report.conservation, std::sqrt(var / static_cast<double>(idx.size())));
    report.conservation_constants.push_back(mean);
  }
  if (!(report.soliton_residual <= options.max_soliton_residual)) {
    throw PreconditionError("soliton identities need a certified soliton: residual " +
                            std::to_string(report.soliton_residual));
  }
  return report;
}

double killing_residual(const SolitonSample& s) {
  const ChartSample cs = as_chart(s);
  if (!cs.complex_structure) throw Unsupported("killing_residual: no complex structure on this sample");
  const int n = cs.chart.dim;
  std::vector<double> worst(s.points.size(), 0.0);
  auto field = [&](const Vector& x) {
    const Matrix g = cs.chart.metric_at(x);
    return Vector(cs.complex_structure(x) * g.ldlt().solve(potential_gradient(cs.chart, x, cs.inner)));
  };
  parallel_for(s.points.size(), [&](std::size_t idx) {
    const Vector& x = s.points[idx];
    const ChartJet jet = chart_jet(cs.chart, x, cs.inner);
    const Vector X = field(x);
    Matrix D(n, n);  // D(k, i) = d_i X^k
    for (int i = 0; i < n; ++i) {
      D.col(i) = fd::first_derivative(
          [&](int k) {
            Vector y = x;
            y(i) += k * cs.outer.step;
            return field(y);
          },
          cs.outer.step, cs.outer.order);
    }
    Matrix lie = D.transpose() * jet.g + jet.g * D;
    for (int k = 0; k < n; ++k) lie += X(k) * jet.dg[k];
    worst[idx] = orthonormal_components(jet.g, lie).cwiseAbs().maxCoeff();
  });
  return *std::max_element(worst.begin(), worst.end());
}

RectifiabilityReport rectifiability_report(const SolitonSample& s, const RectifiabilityOptions& options) {
  const SolitonSample chart_sample = chart_view(s);
  const ChartSample& cs = std::get<ChartSample>(chart_sample.geometry);
  const int n = cs.chart.dim;

  struct PointResult {
    bool skipped = false;
    double variation = 0.0, eigen = 0.0, wedge = 0.0;
  };
  std::vector<PointResult> results(s.points.size());

  auto grad_norm = [&](const Vector& y) {
    const Matrix g = cs.chart.metric_at(y);
    return norm_dual(g.inverse(), potential_gradient(cs.chart, y, cs.inner));
  };

  parallel_for(s.points.size(), [&](std::size_t idx) {
    const Vector& p = s.points[idx];
    PointResult& r = results[idx];
    const Matrix g = cs.chart.metric_at(p);
    const Matrix g_inv = g.inverse();
    const Vector df = potential_gradient(cs.chart, p, cs.inner);
    const double df_norm = norm_dual(g_inv, df);
    if (df_norm < options.critical_gradient) {
      r.skipped = true;
      return;
    }

    // (i) trace the level set through p in every tangent direction.
    const double level = potential(cs.chart, p);
    Matrix tangent(n, 0);
    const Vector grad = g_inv * df;
    for (int a = 0; a < n && tangent.cols() < n - 1; ++a) {
      Vector v = Vector::Unit(n, a);
      v -= (df.dot(v) / df.dot(grad)) * grad;
      for (int c = 0; c < tangent.cols(); ++c) v -= tangent.col(c).dot(g * v) * tangent.col(c);
      const double len = std::sqrt(v.dot(g * v));
      if (len < 1e-8) continue;
      tangent.conservativeResize(n, tangent.cols() + 1);
      tangent.col(tangent.cols() - 1) = v / len;
    }
    double lo = df_norm, hi = df_norm;
    for (int c = 0; c < tangent.cols(); ++c) {
      for (double sign : {1.0, -1.0}) {
        Vector y = p;
        Vector dir = sign * tangent.col(c);
        for (int step = 0; step < options.level_steps; ++step) {
          const Matrix gy = cs.chart.metric_at(y);
          const Vector dfy = potential_gradient(cs.chart, y, cs.inner);
          const Vector grady = gy.ldlt().solve(dfy);
          dir -= (dfy.dot(dir) / dfy.dot(grady)) * grady;
          dir /= std::sqrt(dir.dot(gy * dir));
          y += options.level_step * dir;
          for (int newton = 0; newton < 4; ++newton) {
            const Matrix gn = cs.chart.metric_at(y);
            const Vector dfn = potential_gradient(cs.chart, y, cs.inner);
            const Vector gradn = gn.ldlt().solve(dfn);
            y -= ((potential(cs.chart, y) - level) / dfn.dot(gradn)) * gradn;
          }
          const double value = grad_norm(y);
          lo = std::min(lo, value);
          hi = std::max(hi, value);
        }
      }
    }
    r.variation = (hi - lo) / df_norm;

    // (ii) and (iii) from the curvature oracle.
    const PointGeometry geo = chart_point(cs, p, false);
    const Vector rc_grad = geo.ricci * grad;
    const double mu = rc_grad.dot(grad) / df.dot(grad);
    const Matrix rc_up = g_inv * geo.ricci;
    const double rc_norm = std::sqrt(std::max(0.0, (rc_up * rc_up).trace()));
    r.eigen = norm_dual(g_inv, rc_grad - mu * df) / (df_norm * std::max(1.0, rc_norm));

    const double dS_norm = norm_dual(g_inv, geo.dS);
    if (dS_norm > 1e-7 * std::max(1.0, std::abs(geo.S))) {
      const double cross = df.dot(g_inv * geo.dS);
      const double wedge_sq = df_norm * df_norm * dS_norm * dS_norm - cross * cross;
      r.wedge = std::sqrt(std::max(0.0, wedge_sq)) / (df_norm * dS_norm);
    }
  });

  RectifiabilityReport report;
  for (const PointResult& r : results) {
    if (r.skipped) {
      ++report.skipped;
      continue;
    }
    report.level_variation = std::max(report.level_variation, r.variation);
    report.eigen_residual = std::max(report.eigen_residual, r.eigen);
    report.wedge = std::max(report.wedge, r.wedge);
  }
  report.rectifiable = report.level_variation < options.tolerance;
  report.eigenvector = report.eigen_residual < options.tolerance;
  report.parallel = report.wedge < options.parallel_tolerance;
  report.consistent = report.rectifiable == report.eigenvector && report.eigenvector == report.parallel;
  return report;
}

TransnormalReport transnormal_fit(const SolitonSample& s, const TransnormalOptions& options) {
  const ChartSample cs = as_chart(s);
  const std::size_t m = s.points.size();
  if (m == 0) throw InvalidInput("soliton sample has no points");
  std::vector<double> f(m), b(m), a(m);
  parallel_for(m, [&](std::size_t i) {
    const PotentialJet jet = potential_jet(cs, s.points[i]);
    const Matrix g_inv = jet.g.inverse();
    f[i] = jet.f;
    b[i] = jet.df.dot(g_inv * jet.df);
    a[i] = g_inv.cwiseProduct(jet.hess).sum();
  });

  TransnormalReport report;
  const auto groups = group_components(s);
  for (const auto& [label, idx] : groups) {
    report.components.push_back(fit_levels(s, cs, idx, f, b, a, options, true));
  }
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  report.global = groups.size() == 1 ? report.components.front()
                                     : fit_levels(s, cs, all, f, b, a, options, false);
  return report;
}

HessianSpectrum hessian_spectrum(const SolitonSample& s, double cluster_tolerance) {
  const ChartSample cs = as_chart(s);
  const std::size_t m = s.points.size();
  if (m == 0) throw InvalidInput("soliton sample has no points");
  HessianSpectrum out;
  out.eigenvalues.resize(m);
  std::vector<double> f(m);
  parallel_for(m, [&](std::size_t i) {
    const PotentialJet jet = potential_jet(cs, s.points[i]);
    f[i] = jet.f;
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(orthonormal_components(jet.g, jet.hess),
                                                        Eigen::EigenvaluesOnly);
    out.eigenvalues[i] = solver.eigenvalues();
  });
  for (const Vector& e : out.eigenvalues) {
    for (int i = 0; i + 1 < e.size(); i += 2) out.pair_deviation = std::max(out.pair_deviation, std::abs(e(i + 1) - e(i)));
  }
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  for (const auto& cluster : level_clusters(all, f, cluster_tolerance)) {
    if (cluster.size() < 2) continue;
    const int n = static_cast<int>(out.eigenvalues[cluster.front()].size());
    for (int k = 0; k < n; ++k) {
      double mean = 0.0, var = 0.0;
      for (std::size_t i : cluster) mean += out.eigenvalues[i](k);
      mean /= static_cast<double>(cluster.size());
      for (std::size_t i : cluster) var += std::pow(out.eigenvalues[i](k) - mean, 2);
      out.slice_deviation = std::max(out.slice_deviation, std::sqrt(var / static_cast<double>(cluster.size())));
    }
  }
  return out;
}

std::vector<Vector> tube_sample_points(const WarpedProductMetric& w, int slices, int per_slice, double x_radius) {
  if (slices < 1 || per_slice < 1) throw InvalidInput("tube_sample_points: need at least one point");
  const int d = w.base.frame.dim();
  std::vector<Vector> points;
  for (double t : interior_grid(w.t_min, w.t_max, slices)) {
    for (int j = 0; j < per_slice; ++j) {
      Vector q(d + 1);
      q(0) = t;
      for (int k = 0; k < d; ++k) q(k + 1) = x_radius * std::sin(0.7 * (j + 1) + 1.1 * k);
      points.push_back(q);
    }
  }
  return points;
}

std::vector<Vector> radial_sample_points(int dim, double r_min, double r_max, int levels, int per_level) {
  if (dim < 1 || levels < 1 || per_level < 1) throw InvalidInput("radial_sample_points: empty request");
  std::vector<Vector> points;
  for (int l = 0; l < levels; ++l) {
    const double r = levels == 1 ? r_min : r_min + (r_max - r_min) * l / (levels - 1.0);
    for (int j = 0; j < per_level; ++j) {
      Vector v(dim);
      for (int k = 0; k < dim; ++k) v(k) = std::sin(1.3 * (j + 1) * (k + 1) + 0.4 * k + 0.2);
      points.push_back(r * v.normalized());
    }
  }
  return points;
}

SolitonSample chart_soliton_sample(const SolitonChart& model, std::vector<Vector> points, FdOptions inner,
                                   FdOptions outer) {
  SolitonSample s;
  s.geometry = ChartSample{model.chart, model.complex_structure, inner, outer};
  s.lambda = model.lambda;
  s.points = std::move(points);
  return s;
}

SolitonSample tube_soliton_sample(const WarpedProductMetric& w, double lambda, int slices, int per_slice) {
  SolitonSample s;
  s.geometry = TubeSample{w};
  s.lambda = lambda;
  s.points = tube_sample_points(w, slices, per_slice);
  return s;
}

}  // namespace soliton_forge
