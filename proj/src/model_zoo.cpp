#include "soliton_forge/model_zoo.hpp"

#include <cmath>

#include "soliton_forge/errors.hpp"

namespace soliton_forge {
namespace {

void set_bracket(Tensor3& c, int i, int j, int k, double value) {
  c(k, i, j) = value;
  c(k, j, i) = -value;
}

}  // namespace

ModelId parse_model_name(const std::string& name) {
  ModelId id;
  if (name == "sphere3") id.kind = ModelKind::Sphere3;
  else if (name == "sl2r") id.kind = ModelKind::SL2RCover;
  else if (name == "nil3") id.kind = ModelKind::Nil3;
  else if (name == "gaussian") id.kind = ModelKind::GaussianSoliton;
  else if (name == "cigar") id.kind = ModelKind::Cigar;
  else if (name == "hopf-hypersurface") id.kind = ModelKind::RoundSphereHypersurface;
  else throw InvalidInput("unknown model '" + name + "'");
  return id;
}

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Sphere3: return "sphere3";
    case ModelKind::SL2RCover: return "sl2r";
    case ModelKind::Nil3: return "nil3";
    case ModelKind::GaussianSoliton: return "gaussian";
    case ModelKind::Cigar: return "cigar";
    case ModelKind::RoundSphereHypersurface: return "hopf-hypersurface";
  }
  return "unknown";
}

bool is_almost_contact_model(ModelKind kind) {
  return kind == ModelKind::Sphere3 || kind == ModelKind::SL2RCover || kind == ModelKind::Nil3 ||
         kind == ModelKind::RoundSphereHypersurface;
}

StructureFrame sasakian_frame(double p) {
  Tensor3 c(3);
  set_bracket(c, 0, 1, 2, 2.0);
  set_bracket(c, 1, 2, 0, p);
  set_bracket(c, 2, 0, 1, p);
  return StructureFrame(std::move(c), Matrix::Identity(3, 3));
}

AlmostContactStructure sasakian_structure(double p) {
  Matrix phi = Matrix::Zero(3, 3);
  phi(1, 0) = 1.0;   // Phi e0 = e1
  phi(0, 1) = -1.0;  // Phi e1 = -e0
  return {sasakian_frame(p), Vector::Unit(3, 2), Vector::Unit(3, 2), phi, 1.0};
}

AlmostContactStructure tanno_model(ModelKind kind) {
  switch (kind) {
    case ModelKind::Sphere3: return sasakian_structure(2.0);
    case ModelKind::SL2RCover: return sasakian_structure(-0.5);
    case ModelKind::Nil3: return sasakian_structure(0.0);
    default: throw InvalidInput("tanno_model: " + model_name(kind) + " is not a Tanno model");
  }
}

AlmostContactStructure einstein_base(int n, double k) {
  if (n < 1) throw InvalidInput("einstein_base: complex dimension must be positive");
  if (n == 1) return sasakian_structure(0.5 * k);
  if (k != 0.0) {
    throw Unsupported(
        "einstein_base: only flat bases are available as left-invariant frames for n >= 2");
  }
  const int dim = 2 * n + 1;
  const int reeb = 2 * n;
  Tensor3 c(dim);
  Matrix phi = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    set_bracket(c, 2 * i, 2 * i + 1, reeb, 2.0);
    phi(2 * i + 1, 2 * i) = 1.0;
    phi(2 * i, 2 * i + 1) = -1.0;
  }
  return {StructureFrame(std::move(c), Matrix::Identity(dim, dim)), Vector::Unit(dim, reeb),
          Vector::Unit(dim, reeb), phi, 1.0};
}

ChartMetric heisenberg_chart() {
  ChartMetric chart;
  chart.dim = 3;
  chart.metric_at = [](const Vector& q) {
    // coframe dx, dy, dz - 2x dy
    Matrix theta = Matrix::Identity(3, 3);
    theta(2, 1) = -2.0 * q(0);
    return Matrix(theta.transpose() * theta);
  };
  return chart;
}

Matrix standard_complex_structure(int dim) {
  if (dim < 2 || dim % 2 != 0) throw InvalidInput("complex structure needs an even dimension");
  Matrix j = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; i += 2) {
    j(i + 1, i) = 1.0;
    j(i, i + 1) = -1.0;
  }
  return j;
}

SolitonChart gaussian_soliton(int dim, double lambda) {
  if (dim < 2 || dim % 2 != 0) throw InvalidInput("gaussian_soliton: dim must be even and >= 2");
  SolitonChart s;
  s.lambda = lambda;
  s.chart.dim = dim;
  s.chart.metric_at = [dim](const Vector&) { return Matrix(Matrix::Identity(dim, dim)); };
  s.chart.scalar_field_at = [lambda](const Vector& x) { return 0.5 * lambda * x.squaredNorm(); };
  const Matrix j = standard_complex_structure(dim);
  s.complex_structure = [j](const Vector&) { return j; };
  s.lower = Vector::Constant(dim, -2.0);
  s.upper = Vector::Constant(dim, 2.0);
  return s;
}

SolitonChart cigar_soliton() {
  SolitonChart s;
  s.lambda = 0.0;
  s.chart.dim = 2;
  s.chart.metric_at = [](const Vector& x) {
    return Matrix(Matrix::Identity(2, 2) / (1.0 + x.squaredNorm()));
  };
  s.chart.scalar_field_at = [](const Vector& x) { return -std::log1p(x.squaredNorm()); };
  const Matrix j = standard_complex_structure(2);
  s.complex_structure = [j](const Vector&) { return j; };
  s.lower = Vector::Constant(2, -3.0);
  s.upper = Vector::Constant(2, 3.0);
  return s;
}

HypersurfaceModel round_sphere_hypersurface(double radius) {
  if (!(radius > 0.0)) throw InvalidInput("round_sphere_hypersurface: radius must be positive");
  AlmostContactStructure base = sasakian_structure(2.0);
  HypersurfaceModel out;
  out.structure = {base.frame.with_metric(radius * radius * Matrix::Identity(3, 3)),
                   base.zeta / radius, base.eta * radius, base.phi, 1.0 / radius};
  out.shape_operator = Matrix::Identity(3, 3) / radius;
  return out;
}

}  // namespace soliton_forge
