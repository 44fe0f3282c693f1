#pragma once

#include <functional>
#include <string>

#include "soliton_forge/almost_contact.hpp"
#include "soliton_forge/frame_geometry.hpp"

namespace soliton_forge {

enum class ModelKind { Sphere3, SL2RCover, Nil3, GaussianSoliton, Cigar, RoundSphereHypersurface };

struct ModelId {
  ModelKind kind = ModelKind::Sphere3;
  int dim = 4;          // GaussianSoliton only
  double lambda = 1.0;  // GaussianSoliton only
  double radius = 1.0;  // RoundSphereHypersurface only
};

/// Parses the CLI names sphere3, sl2r, nil3, gaussian, cigar, hopf-hypersurface.
/// Throws InvalidInput for anything else.
ModelId parse_model_name(const std::string& name);
std::string model_name(ModelKind kind);
bool is_almost_contact_model(ModelKind kind);

/// Three-dimensional frame with [e0, e1] = 2 e2, [e1, e2] = p e0, [e2, e0] = p e1 and
/// identity metric. With zeta = e2 and Phi e0 = e1 this is a Sasakian structure
/// with contact scale 1 whose transverse (base) curvature is 2p.
StructureFrame sasakian_frame(double p);

/// Standard K-contact structure on sasakian_frame(p).
AlmostContactStructure sasakian_structure(double p);

/// One of the three homogeneous Sasakian models; Phi-sectional curvature 1, -4, -3.
AlmostContactStructure tanno_model(ModelKind kind);

/// Sasakian circle bundle over a Kaehler-Einstein base of complex dimension n with
/// Rc_N = k g_N (the base of the Calabi construction). Supported: n = 1 with any k,
/// and n >= 2 with k = 0 (Heisenberg group). Other cases throw Unsupported.
AlmostContactStructure einstein_base(int n, double k);

/// Independent coordinate chart (x, y, z) of the Nil3 model:
/// dx^2 + dy^2 + (dz - 2x dy)^2, with e0 = d/dx, e1 = d/dy + 2x d/dz, e2 = d/dz.
ChartMetric heisenberg_chart();

/// A metric-plus-potential chart with an optional compatible complex structure.
struct SolitonChart {
  ChartMetric chart;
  double lambda = 0.0;
  std::function<Matrix(const Vector&)> complex_structure;  // may be empty
  /// Box in which the chart is valid and from which sample points are drawn.
  Vector lower;
  Vector upper;
};

/// Flat R^dim with f = (lambda / 2)|x|^2 and the standard complex structure.
SolitonChart gaussian_soliton(int dim, double lambda);

/// Steady cigar: g = (dx^2 + dy^2) / (1 + x^2 + y^2), f = -log(1 + x^2 + y^2).
SolitonChart cigar_soliton();

/// Standard complex structure on R^{2m}: J e_{2i} = e_{2i+1}.
Matrix standard_complex_structure(int dim);

/// Induced structure on the radius-r sphere in flat C^2 together with its shape operator.
/// The frame is the Sphere3 frame with metric r^2 Id (so zeta = e2 / r); L = (1/r) Id.
struct HypersurfaceModel {
  AlmostContactStructure structure;
  Matrix shape_operator;
};
HypersurfaceModel round_sphere_hypersurface(double radius);

}  // namespace soliton_forge
