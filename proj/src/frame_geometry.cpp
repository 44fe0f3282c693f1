#include "soliton_forge/frame_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "soliton_forge/errors.hpp"
#include "soliton_forge/finite_difference.hpp"

namespace soliton_forge {
namespace {

constexpr double kJacobiTolerance = 1e-12;

void require_spd(const Matrix& g, const char* what) {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw InvalidInput(std::string(what) + ": metric must be a non-empty square matrix");
  }
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInput(std::string(what) + ": metric is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidInput(std::string(what) + ": metric is not positive-definite");
  }
}

// Riemann, Ricci, scalar and the standard symmetry residuals from the mixed
// tensor r(p, i, j, k) = (R(e_i, e_j) e_k)^p.
CurvatureReport assemble_report(const Matrix& g, const Matrix& g_inv, const Tensor4& mixed) {
  const int n = static_cast<int>(g.rows());
  CurvatureReport report;
  report.metric = g;
  report.riemann = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double sum = 0.0;
          for (int p = 0; p < n; ++p) sum += g(l, p) * mixed(p, i, j, k);
          report.riemann(i, j, k, l) = sum;
        }

  report.ricci = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += mixed(i, i, j, k);
      report.ricci(j, k) = sum;
    }
  report.scalar = (g_inv.cwiseProduct(report.ricci)).sum();

  double antisym = 0.0, pair = 0.0, bianchi = 0.0, ricci_trace = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double r = report.riemann(i, j, k, l);
          antisym = std::max(antisym, std::abs(r + report.riemann(j, i, k, l)));
          pair = std::max(pair, std::abs(r - report.riemann(k, l, i, j)));
          bianchi = std::max(bianchi, std::abs(r + report.riemann(j, k, i, l) +
                                               report.riemann(k, i, j, l)));
        }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) sum += g_inv(i, l) * report.riemann(i, j, k, l);
      ricci_trace = std::max(ricci_trace, std::abs(sum - report.ricci(j, k)));
    }
  report.residual_norms["antisymmetry"] = antisym;
  report.residual_norms["pair_symmetry"] = pair;
  report.residual_norms["bianchi1"] = bianchi;
  report.residual_norms["ricci_trace"] = ricci_trace;
  report.residual_norms["scalar_trace"] =
      std::abs((g_inv.cwiseProduct(report.ricci)).sum() - report.scalar);
  return report;
}

}  // namespace

StructureFrame::StructureFrame(Tensor3 structure_constants, Matrix metric)
    : structure_constants_(std::move(structure_constants)), metric_(std::move(metric)) {
  const int n = structure_constants_.dim();
  if (n <= 0) throw InvalidInput("StructureFrame: dimension must be positive");
  if (metric_.rows() != n || metric_.cols() != n) {
    throw InvalidInput("StructureFrame: metric size does not match structure constants");
  }
  require_spd(metric_, "StructureFrame");
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double a = structure_constants_(k, i, j);
        const double b = structure_constants_(k, j, i);
        if (std::abs(a + b) > kJacobiTolerance * std::max(1.0, std::abs(a))) {
          throw InvalidInput("StructureFrame: structure constants are not antisymmetric");
        }
      }
  if (jacobi_residual() > kJacobiTolerance) {
    throw InvalidInput("StructureFrame: structure constants violate the Jacobi identity");
  }
  metric_inverse_ = metric_.inverse();
}

StructureFrame StructureFrame::abelian(const Matrix& metric) {
  return StructureFrame(Tensor3(static_cast<int>(metric.rows())), metric);
}

StructureFrame StructureFrame::with_metric(Matrix metric) const {
  return StructureFrame(structure_constants_, std::move(metric));
}

Vector StructureFrame::bracket(const Vector& x, const Vector& y) const {
  return ad(x) * y;
}

Matrix StructureFrame::ad(const Vector& x) const {
  const int n = dim();
  Matrix out = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a) {
      if (x(a) == 0.0) continue;
      for (int b = 0; b < n; ++b) out(k, b) += x(a) * structure_constants_(k, a, b);
    }
  return out;
}

double StructureFrame::norm(const Vector& x) const { return std::sqrt(inner(x, x)); }

double StructureFrame::jacobi_residual() const {
  const int n = dim();
  const Tensor3& c = structure_constants_;
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double sum = 0.0;
          for (int m = 0; m < n; ++m) {
            sum += c(m, i, j) * c(l, m, k) + c(m, j, k) * c(l, m, i) + c(m, k, i) * c(l, m, j);
          }
          worst = std::max(worst, std::abs(sum));
        }
  return worst;
}

double CurvatureReport::riemann_form(const Vector& x, const Vector& y, const Vector& z,
                                     const Vector& w) const {
  const int n = riemann.dim();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (x(i) == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (y(j) == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        if (z(k) == 0.0) continue;
        for (int l = 0; l < n; ++l) sum += x(i) * y(j) * z(k) * w(l) * riemann(i, j, k, l);
      }
    }
  }
  return sum;
}

double CurvatureReport::sectional(const Vector& x, const Vector& y) const {
  const double xx = x.dot(metric * x), yy = y.dot(metric * y), xy = x.dot(metric * y);
  const double area2 = xx * yy - xy * xy;
  if (area2 <= 1e-14 * std::max(1.0, xx * yy)) {
    throw InvalidInput("sectional curvature: vectors span a degenerate plane");
  }
  return riemann_form(x, y, y, x) / area2;
}

Tensor3 levi_civita_frame(const StructureFrame& frame) {
  const int n = frame.dim();
  const Tensor3& c = frame.structure_constants();
  const Matrix& g = frame.metric();
  const Matrix& g_inv = frame.metric_inverse();

  // lowered(l, i, j) = g(l, [e_i, e_j])
  Tensor3 lowered(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int m = 0; m < n; ++m) sum += g(l, m) * c(m, i, j);
        lowered(l, i, j) = sum;
      }

  // Koszul for constant inner products:
  // 2 g(nabla_i e_j, e_l) = g([e_i,e_j],e_l) - g([e_j,e_l],e_i) + g([e_l,e_i],e_j)
  Tensor3 gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int l = 0; l < n; ++l) {
          const double koszul = lowered(l, i, j) - lowered(i, j, l) + lowered(j, l, i);
          sum += g_inv(k, l) * 0.5 * koszul;
        }
        gamma(k, i, j) = sum;
      }
  return gamma;
}

ConnectionResiduals connection_residuals(const StructureFrame& frame, const Tensor3& gamma) {
  const int n = frame.dim();
  const Tensor3& c = frame.structure_constants();
  const Matrix& g = frame.metric();
  ConnectionResiduals out;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        out.torsion = std::max(out.torsion, std::abs(gamma(k, i, j) - gamma(k, j, i) - c(k, i, j)));
      }
  // g(nabla_i e_j, e_k) + g(e_j, nabla_i e_k) = e_i(g_jk) = 0
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int m = 0; m < n; ++m) sum += gamma(m, i, j) * g(m, k) + gamma(m, i, k) * g(j, m);
        out.metric = std::max(out.metric, std::abs(sum));
      }
  return out;
}

CurvatureReport curvature_frame(const StructureFrame& frame) {
  const int n = frame.dim();
  const Tensor3 gamma = levi_civita_frame(frame);
  const Tensor3& c = frame.structure_constants();

  // (R(e_i,e_j)e_k)^p = Gamma^m_jk Gamma^p_im - Gamma^m_ik Gamma^p_jm - c^m_ij Gamma^p_mk
  Tensor4 mixed(n);
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double sum = 0.0;
          for (int m = 0; m < n; ++m) {
            sum += gamma(m, j, k) * gamma(p, i, m) - gamma(m, i, k) * gamma(p, j, m) -
                   c(m, i, j) * gamma(p, m, k);
          }
          mixed(p, i, j, k) = sum;
        }
  return assemble_report(frame.metric(), frame.metric_inverse(), mixed);
}

Tensor3 covariant_derivative_endomorphism(const StructureFrame& frame, const Tensor3& gamma,
                                          const Matrix& endomorphism) {
  const int n = frame.dim();
  if (endomorphism.rows() != n || endomorphism.cols() != n || gamma.dim() != n) {
    throw InvalidInput("covariant_derivative_endomorphism: dimension mismatch");
  }
  Tensor3 out(n);
  Matrix gamma_i(n, n);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < n; ++m)
      for (int k = 0; k < n; ++k) gamma_i(m, k) = gamma(m, i, k);
    const Matrix commutator = gamma_i * endomorphism - endomorphism * gamma_i;
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) out(i, j, m) = commutator(m, j);
  }
  return out;
}

ChartJet chart_jet(const ChartMetric& chart, const Vector& point, const FdOptions& options) {
  const int n = chart.dim;
  if (point.size() != n) throw InvalidInput("chart_jet: point dimension mismatch");
  if (!(options.step > 0.0)) throw InvalidInput("chart_jet: step must be positive");
  const double h = options.step;

  auto eval = [&](const Vector& x) -> Matrix {
    Matrix g = chart.metric_at(x);
    if (g.rows() != n || g.cols() != n) throw InvalidInput("chart metric has wrong size");
    Eigen::LLT<Matrix> llt(0.5 * (g + g.transpose()));
    if (llt.info() != Eigen::Success) {
      throw DegenerateChart("chart metric is not positive-definite at a stencil point");
    }
    return g;
  };

  ChartJet jet;
  jet.g = eval(point);
  jet.g_inv = jet.g.inverse();
  jet.dg.assign(n, Matrix::Zero(n, n));
  jet.ddg.assign(n, std::vector<Matrix>(n, Matrix::Zero(n, n)));

  for (int a = 0; a < n; ++a) {
    auto along = [&](int k) -> Matrix {
      Vector x = point;
      x(a) += k * h;
      return k == 0 ? jet.g : eval(x);
    };
    jet.dg[a] = fd::first_derivative(along, h, options.order);
    jet.ddg[a][a] = fd::second_derivative(along, h, options.order);
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      auto plane = [&](int i, int j) -> Matrix {
        Vector x = point;
        x(a) += i * h;
        x(b) += j * h;
        return eval(x);
      };
      jet.ddg[a][b] = fd::mixed_derivative(plane, h, options.order);
      jet.ddg[b][a] = jet.ddg[a][b];
    }

  jet.christoffel = Tensor3(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int l = 0; l < n; ++l) {
          sum += jet.g_inv(k, l) * 0.5 * (jet.dg[i](j, l) + jet.dg[j](i, l) - jet.dg[l](i, j));
        }
        jet.christoffel(k, i, j) = sum;
      }
  return jet;
}

CurvatureReport fd_curvature_oracle(const ChartMetric& chart, const Vector& point, double step) {
  return fd_curvature_oracle(chart, point, FdOptions{step, 4});
}

CurvatureReport fd_curvature_oracle(const ChartMetric& chart, const Vector& point,
                                    const FdOptions& options) {
  const ChartJet jet = chart_jet(chart, point, options);
  const int n = chart.dim;
  const Tensor3& gamma = jet.christoffel;

  // d_a Gamma^l_ij = g^{lk} d_a Gamma_{kij} - g^{lp} (d_a g_pq) Gamma^q_ij
  std::vector<Tensor3> d_gamma(n, Tensor3(n));
  for (int a = 0; a < n; ++a)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double sum = 0.0;
          for (int k = 0; k < n; ++k) {
            const double d_lowered =
                0.5 * (jet.ddg[a][i](j, k) + jet.ddg[a][j](i, k) - jet.ddg[a][k](i, j));
            sum += jet.g_inv(l, k) * d_lowered;
          }
          for (int p = 0; p < n; ++p) {
            double dg_gamma = 0.0;
            for (int q = 0; q < n; ++q) dg_gamma += jet.dg[a](p, q) * gamma(q, i, j);
            sum -= jet.g_inv(l, p) * dg_gamma;
          }
          d_gamma[a](l, i, j) = sum;
        }

  // (R(d_i, d_j) d_k)^p = d_i Gamma^p_jk - d_j Gamma^p_ik + Gamma^m_jk Gamma^p_im - Gamma^m_ik Gamma^p_jm
  Tensor4 mixed(n);
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double sum = d_gamma[i](p, j, k) - d_gamma[j](p, i, k);
          for (int m = 0; m < n; ++m) {
            sum += gamma(m, j, k) * gamma(p, i, m) - gamma(m, i, k) * gamma(p, j, m);
          }
          mixed(p, i, j, k) = sum;
        }
  return assemble_report(jet.g, jet.g_inv, mixed);
}

Matrix group_coframe(const StructureFrame& frame, const Vector& x) {
  const int n = frame.dim();
  if (x.size() != n) throw InvalidInput("group_coframe: point dimension mismatch");
  const Matrix minus_ad = -frame.ad(x);
  Matrix term = Matrix::Identity(n, n);
  Matrix psi = term;
  for (int k = 1; k < 60; ++k) {
    term = minus_ad * term / static_cast<double>(k + 1);
    psi += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18 * std::max(1.0, psi.cwiseAbs().maxCoeff())) break;
  }
  return psi;
}

ChartMetric group_chart(const StructureFrame& frame) {
  ChartMetric chart;
  chart.dim = frame.dim();
  chart.metric_at = [frame](const Vector& x) -> Matrix {
    const Matrix psi = group_coframe(frame, x);
    return psi.transpose() * frame.metric() * psi;
  };
  return chart;
}

}  // namespace soliton_forge
