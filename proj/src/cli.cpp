#include "soliton_forge/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "soliton_forge/almost_contact.hpp"
#include "soliton_forge/errors.hpp"
#include "soliton_forge/identity_suite.hpp"
#include "soliton_forge/interpolation.hpp"
#include "soliton_forge/model_zoo.hpp"
#include "soliton_forge/report_io.hpp"
#include "soliton_forge/soliton_ode.hpp"

namespace soliton_forge {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr int kCantCreate = 73;  // sysexits EX_CANTCREAT

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string model;
  std::string deform;
  std::string problem_file;
  std::string profile_dir;
  std::string output_dir;
  std::vector<std::string> tolerances;
  std::vector<std::string> checks;
  int grid_size = 200;
};

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(text.data(), last, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw UsageError("cannot parse " + what + " '" + text + "'");
  }
  return v;
}

/// Named tolerances with defaults; `--tol name=value` overrides, unknown names are usage errors.
class Tolerances {
 public:
  Tolerances(std::map<std::string, double> defaults, const std::vector<std::string>& overrides)
      : values_(std::move(defaults)) {
    for (const std::string& item : overrides) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--tol expects name=value, got '" + item + "'");
      const std::string name = item.substr(0, eq);
      if (!values_.count(name)) {
        std::string known;
        for (const auto& [k, v] : values_) known += (known.empty() ? "" : ", ") + k;
        throw UsageError("unknown tolerance '" + name + "' (this command accepts: " + known + ")");
      }
      const double v = parse_number(item.substr(eq + 1), "tolerance " + name);
      if (!(v > 0.0)) throw UsageError("tolerance " + name + " must be positive");
      values_[name] = v;
    }
  }
  double operator()(const std::string& name) const { return values_.at(name); }
  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

 private:
  std::map<std::string, double> values_;
};

/// One verified invariant.
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

Check bound_check(const std::string& name, double value, double tolerance) {
  return {name, value, tolerance, std::isfinite(value) && value <= tolerance, {}};
}

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const Check& c : checks) {
    json j;
    j["name"] = c.name;
    j["value"] = c.value;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    if (!c.detail.empty()) j["detail"] = c.detail;
    arr.push_back(j);
  }
  return arr;
}

bool all_pass(const std::vector<Check>& checks) {
  for (const Check& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

void report_failures(const std::vector<Check>& checks, std::ostream& err) {
  for (const Check& c : checks) {
    if (!c.pass) {
      err << "FAILED " << c.name << ": " << format_real(c.value) << " > " << format_real(c.tolerance);
      if (!c.detail.empty()) err << " (" << c.detail << ")";
      err << '\n';
    }
  }
}

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + dir.string());
  return dir;
}

void write_output(const fs::path& path, const std::string& text) {
  try {
    write_text_file(path, text);
  } catch (const fs::filesystem_error& e) {
    throw OutputError(e.what());
  }
}

/// Prints the document and, when an output directory is configured, writes it to `file`.
void emit(const RunConfig& cfg, const json& doc, const std::string& file, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  out << text;
  if (!cfg.output_dir.empty()) write_output(prepare_output(cfg) / file, text);
}

std::string read_input(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw MissingInput("missing input file " + path.string());
  return read_text_file(path);
}

// ---------------------------------------------------------------------------------------
// Almost-contact models

ModelId resolve_model(const std::string& name) {
  if (name.empty()) throw UsageError("--model is required");
  try {
    return parse_model_name(name);
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
}

/// "[+|-]H:F" with H, F > 0.
DeformationParams parse_deformation(const std::string& text) {
  DeformationParams d;
  std::string body = text;
  if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
    d.sign = body[0] == '-' ? -1 : 1;
    body = body.substr(1);
  }
  const auto colon = body.find(':');
  if (colon == std::string::npos) throw UsageError("--deform expects [+|-]H:F, got '" + text + "'");
  d.H = parse_number(body.substr(0, colon), "deformation H");
  d.F = parse_number(body.substr(colon + 1), "deformation F");
  if (!(d.H > 0.0) || !(d.F > 0.0)) throw UsageError("--deform needs H > 0 and F > 0");
  return d;
}

struct ContactModel {
  ModelId id;
  AlmostContactStructure base;
  std::optional<Matrix> shape_operator;
  std::optional<DeformationParams> deformation;
  AlmostContactStructure structure;  // deformed when a deformation is given
};

ContactModel load_contact_model(const RunConfig& cfg) {
  ContactModel m;
  m.id = resolve_model(cfg.model);
  if (!is_almost_contact_model(m.id.kind)) {
    throw UsageError("model '" + cfg.model + "' is not an almost-contact model");
  }
  if (m.id.kind == ModelKind::RoundSphereHypersurface) {
    HypersurfaceModel h = round_sphere_hypersurface(m.id.radius);
    m.base = h.structure;
    m.shape_operator = h.shape_operator;
  } else {
    m.base = tanno_model(m.id.kind);
  }
  m.structure = m.base;
  if (!cfg.deform.empty()) {
    m.deformation = parse_deformation(cfg.deform);
    m.structure = hf_deform(m.base, *m.deformation);
  }
  return m;
}

json deformation_json(const std::optional<DeformationParams>& d) {
  if (!d) return nullptr;
  return json{{"sign", d->sign}, {"H", d->H}, {"F", d->F}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json classification_json(const StructureClass& c) {
  return json{{"tag", to_string(c.tag)}, {"b", c.b}, {"residual", c.residual}};
}

/// Phi-sectional curvature over evenly spaced unit horizontal directions: mean and spread.
std::pair<double, double> phi_sectional_sweep(const AlmostContactStructure& acs, int directions = 8) {
  const Matrix h = horizontal_basis(acs);
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (int i = 0; i < directions; ++i) {
    const double theta = M_PI * i / directions;
    Vector x = std::cos(theta) * h.col(0) + std::sin(theta) * h.col(1);
    x /= acs.frame.norm(x);
    const double k = phi_sectional(acs, x);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
    sum += k;
  }
  return {sum / directions, hi - lo};
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  const Tolerances tol({{"classify", 1e-8}}, cfg.tolerances);
  const ContactModel m = load_contact_model(cfg);
  const StructureClass c = classify(m.structure, tol("classify"));
  json doc = classification_json(c);
  doc["model"] = model_name(m.id.kind);
  doc["deformation"] = deformation_json(m.deformation);
  if (m.shape_operator && !m.deformation) {
    const ShapeClass s = shape_classify(*m.shape_operator, m.structure, tol("classify"));
    doc["shape"] = json{{"tag", to_string(s.tag)}, {"alpha", s.alpha}, {"beta", s.beta}, {"residual", s.residual}};
  }
  emit(cfg, doc, "classification.json", out);
  return c.tag == StructureTag::Neither ? exit_code::neither : exit_code::ok;
}

int cmd_deform(const RunConfig& cfg, std::ostream& out) {
  if (cfg.deform.empty()) throw UsageError("deform needs --deform [+|-]H:F");
  const Tolerances tol({{"classify", 1e-8}, {"structure", 1e-12}}, cfg.tolerances);
  const ContactModel m = load_contact_model(cfg);
  const AlmostContactStructure& d = m.structure;

  json doc;
  doc["model"] = model_name(m.id.kind);
  doc["deformation"] = deformation_json(m.deformation);
  doc["metric"] = matrix_json(d.frame.metric());
  doc["zeta"] = vector_json(d.zeta);
  doc["eta"] = vector_json(d.eta);
  doc["phi"] = matrix_json(d.phi);
  doc["contact_scale"] = d.contact_scale ? json(*d.contact_scale) : json(nullptr);
  const ValidationReport v = validate(d, tol("structure"));
  json residuals = json::object();
  for (const NamedResidual& r : v.residuals) residuals[r.name] = r.value;
  doc["validation"] = json{{"ok", v.ok()}, {"residuals", residuals}};
  doc["classification"] = classification_json(classify(d, tol("classify")));
  try {
    const DeformedCurvature dc = deformed_ricci(m.base, *m.deformation);
    doc["curvature"] = json{{"ricci", matrix_json(dc.ricci)},
                            {"scalar", dc.scalar},
                            {"reeb_ricci", dc.reeb_ricci},
                            {"reeb_sectional", dc.reeb_sectional},
                            {"kappa2", dc.kappa2}};
  } catch (const PreconditionError& e) {
    doc["curvature"] = json{{"unavailable", e.what()}};
  }
  emit(cfg, doc, "deformation.json", out);
  return exit_code::ok;
}

// ---------------------------------------------------------------------------------------
// Soliton problems

SolveOptions solve_options(const Tolerances& tol) {
  SolveOptions o;
  o.rtol = tol("rtol");
  o.atol = tol("atol");
  return o;
}

std::map<std::string, double> solve_tolerance_defaults() {
  const SolveOptions so;
  const BoundaryOptions bo;
  return {{"residual", 1e-6},         {"constraint", 1e-8},    {"closed_form", 1e-8},
          {"rtol", so.rtol},          {"atol", so.atol},       {"zero_tol", bo.zero_tol},
          {"slope_tol", bo.slope_tol}, {"max_error", bo.max_error}};
}

ProblemFile load_problem(const fs::path& path) {
  const std::string text = read_input(path);
  try {
    return parse_problem(text);
  } catch (const InvalidInput& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

json problem_json(const ProblemFile& pf) {
  const SolitonProblem& p = pf.problem;
  return json{{"lambda", p.lambda}, {"k", p.k},         {"n", p.n},         {"A", p.A},
              {"B", p.B},           {"C", p.C},         {"s_min", p.s_min}, {"s_max", p.s_max},
              {"alpha_init", pf.alpha_init}};
}

struct Pipeline {
  ProblemFile problem;
  AlphaProfile profile;
  WarpedProductMetric tube;
};

/// Solves the problem; EmptyProfile propagates to the caller.
Pipeline run_pipeline(const ProblemFile& pf, const SolveOptions& options) {
  Pipeline pl{pf, solve_alpha(pf.problem, pf.alpha_init, options), {}};
  pl.tube = calabi_to_tube(pl.profile, pf.problem);
  return pl;
}

json boundary_json(const WarpedProductMetric& w, End end, const BoundaryOptions& options) {
  const BoundaryReport b = boundary_check(w, end, options);
  json j{{"kind", to_string(b.kind)},
         {"reason", b.reason},
         {"H", b.H},
         {"F", b.F},
         {"dH", b.dH},
         {"dF", b.dF},
         {"extrapolation_error", b.extrapolation_error}};
  if (b.kind == BoundaryKind::SmoothPoint) {
    // The collapsing slice is the base itself; record what it is.
    const StructureClass c = classify(w.base);
    json base = classification_json(c);
    if (w.base.frame.dim() == 3) base["phi_sectional"] = phi_sectional_sweep(w.base).first;
    j["base"] = base;
  }
  return j;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.problem_file.empty()) throw UsageError("solve needs --problem FILE");
  if (cfg.output_dir.empty()) throw UsageError("solve needs --out DIR");
  const Tolerances tol(solve_tolerance_defaults(), cfg.tolerances);
  const ProblemFile pf = load_problem(cfg.problem_file);

  Pipeline pl;
  try {
    pl = run_pipeline(pf, solve_options(tol));
  } catch (const EmptyProfile& e) {
    err << "empty profile: " << e.what() << '\n';
    const SolitonProblem& p = pf.problem;
    if (!singular_start(p)) {
      err << "  alpha(s_min) = " << format_real(pf.alpha_init)
          << ", alpha'(s_min) = " << format_real(alpha_ode_rhs(p.s_min, pf.alpha_init, p)) << '\n';
    }
    return exit_code::empty_profile;
  }
  const SolitonProblem& p = pf.problem;
  const SolitonResidual r = soliton_residual(pl.tube, p, cfg.grid_size);

  BoundaryOptions bo;
  bo.zero_tol = tol("zero_tol");
  bo.slope_tol = tol("slope_tol");
  bo.max_error = tol("max_error");

  std::vector<Check> checks{
      bound_check("R1", r.R1, tol("residual")),
      bound_check("R2_zeta", r.R2_zeta, tol("residual")),
      bound_check("R2_horiz", r.R2_horiz, tol("residual")),
      bound_check("R3", r.R3, tol("constraint")),
      bound_check("R4", r.R4, tol("residual")),
      bound_check("closed_form_gap", pl.profile.closed_form_gap, tol("closed_form")),
  };

  const fs::path dir = prepare_output(cfg);
  write_output(dir / "profile.csv", to_csv(profile_table(pl.profile, pl.tube, p)));
  write_output(dir / "residuals.csv", to_csv(residual_table(r, pl.tube)));

  json doc;
  doc["problem"] = problem_json(pf);
  doc["nodes"] = pl.profile.grid.size();
  doc["singular_start"] = pl.profile.singular_start;
  doc["zero_crossing"] = pl.profile.zero_crossing
                             ? json{{"s_lo", pl.profile.zero_crossing->s_lo}, {"s_hi", pl.profile.zero_crossing->s_hi}}
                             : json(nullptr);
  doc["s_end"] = pl.profile.grid.back();
  doc["t_max"] = pl.tube.t_max;
  doc["grid"] = cfg.grid_size;
  doc["tolerances"] = tol.to_json();
  doc["checks"] = checks_json(checks);
  doc["boundary"] = json{{"lower", boundary_json(pl.tube, End::Lower, bo)},
                         {"upper", boundary_json(pl.tube, End::Upper, bo)}};
  doc["pass"] = all_pass(checks);
  const std::string text = doc.dump(2) + "\n";
  write_output(dir / "summary.json", text);
  out << text;
  report_failures(checks, err);
  return all_pass(checks) ? exit_code::ok : exit_code::check_failed;
}

// ---------------------------------------------------------------------------------------
// Verification

void require_known_checks(const std::vector<std::string>& requested, const std::vector<std::string>& available,
                          const std::string& target) {
  for (const std::string& c : requested) {
    if (std::find(available.begin(), available.end(), c) == available.end()) {
      std::string known;
      for (const auto& a : available) known += (known.empty() ? "" : ", ") + a;
      throw UsageError("check '" + c + "' is not available for " + target + " (available: " + known + ")");
    }
  }
}

bool wanted(const std::vector<std::string>& requested, const std::string& name) {
  return requested.empty() || std::find(requested.begin(), requested.end(), name) != requested.end();
}

std::vector<Check> verify_contact(const RunConfig& cfg, json& doc) {
  const Tolerances tol({{"structure", 1e-12}, {"phi", 1e-10}, {"killing", 1e-10}, {"classify", 1e-8},
                        {"curvature", 1e-8}},
                       cfg.tolerances);
  const ContactModel m = load_contact_model(cfg);
  require_known_checks(cfg.checks, {"structure", "phi-sectional", "killing", "classification", "curvature"},
                       cfg.model);
  doc["model"] = model_name(m.id.kind);
  doc["deformation"] = deformation_json(m.deformation);
  const AlmostContactStructure& acs = m.structure;

  std::vector<Check> checks;
  if (wanted(cfg.checks, "structure")) {
    const ValidationReport v = validate(acs, tol("structure"));
    double worst = 0.0;
    for (const NamedResidual& r : v.residuals) worst = std::max(worst, r.value);
    Check c = bound_check("structure", worst, tol("structure"));
    for (const std::string& f : v.failures()) c.detail += (c.detail.empty() ? "" : ", ") + f;
    checks.push_back(c);
  }
  if (wanted(cfg.checks, "phi-sectional")) {
    const auto [value, spread] = phi_sectional_sweep(acs);
    Check c = bound_check("phi-sectional", spread, tol("phi"));
    c.detail = "constant over horizontal directions";
    checks.push_back(c);
    doc["phi_sectional"] = value;
  }
  if (wanted(cfg.checks, "killing")) {
    checks.push_back(bound_check("killing", killing_residual(acs), tol("killing")));
  }
  if (wanted(cfg.checks, "classification")) {
    const StructureClass sc = classify(acs, tol("classify"));
    Check c = bound_check("classification", sc.residual, tol("classify"));
    c.pass = c.pass && sc.tag != StructureTag::Neither;
    c.detail = to_string(sc.tag);
    checks.push_back(c);
    doc["classification"] = classification_json(sc);
  }
  if (wanted(cfg.checks, "curvature")) {
    // Closed-form deformed curvature against the frame-formula curvature of the deformed metric.
    const DeformationParams d = m.deformation.value_or(DeformationParams{});
    const DeformedCurvature dc = deformed_ricci(m.base, d);
    const CurvatureReport direct = curvature_frame(dc.deformed.frame);
    checks.push_back(bound_check("curvature", (dc.ricci - direct.ricci).cwiseAbs().maxCoeff(), tol("curvature")));
  }
  return checks;
}

struct ChartModelSample {
  SolitonSample sample;
  double identity_tolerance = 1e-8;
};

ChartModelSample chart_model_sample(const ModelId& id) {
  if (id.kind == ModelKind::GaussianSoliton) {
    // Quadratic potential: a wide stencil has no truncation error and less rounding.
    return {chart_soliton_sample(gaussian_soliton(id.dim, id.lambda),
                                 radial_sample_points(id.dim, 0.3, 1.5, 5, 3), {0.05, 8}, {0.05, 6}),
            1e-8};
  }
  return {chart_soliton_sample(cigar_soliton(), radial_sample_points(2, 0.3, 1.5, 13, 2)), 1e-6};
}

/// The identity suite on a sample: checks plus the machine-readable report.
std::vector<Check> identity_checks(const SolitonSample& s, const Tolerances& tol,
                                   const std::vector<std::string>& requested, json& doc, FitTable* fit_table) {
  std::vector<Check> checks;
  const double soliton = sample_soliton_residual(s);
  doc["soliton_residual"] = soliton;
  if (wanted(requested, "soliton")) checks.push_back(bound_check("soliton", soliton, tol("identity")));

  if (wanted(requested, "identities")) {
    try {
      IdentityOptions io;
      io.max_soliton_residual = tol("identity");
      const IdentityReport r = soliton_identities(s, io);
      doc["identities"] = json{{"trace", r.trace},
                               {"bianchi", r.bianchi},
                               {"conservation", r.conservation},
                               {"laplacian_S", r.laplacian_S},
                               {"conservation_constants", r.conservation_constants}};
      checks.push_back(bound_check("identity.trace", r.trace, tol("identity")));
      checks.push_back(bound_check("identity.bianchi", r.bianchi, tol("identity")));
      checks.push_back(bound_check("identity.conservation", r.conservation, tol("identity")));
      checks.push_back(bound_check("identity.laplacian_S", r.laplacian_S, tol("identity")));
    } catch (const PreconditionError& e) {
      Check c{"identities", soliton, tol("identity"), false, e.what()};
      checks.push_back(c);
    }
  }
  if (wanted(requested, "killing")) {
    try {
      const double k = killing_residual(s);
      doc["killing"] = k;
      checks.push_back(bound_check("killing", k, tol("killing")));
    } catch (const Unsupported& e) {
      checks.push_back({"killing", NAN, tol("killing"), false, e.what()});
    }
  }
  if (wanted(requested, "rectifiability")) {
    const RectifiabilityReport r = rectifiability_report(s);
    doc["rectifiability"] = json{{"rectifiable", r.rectifiable},
                                 {"eigenvector", r.eigenvector},
                                 {"parallel", r.parallel},
                                 {"consistent", r.consistent},
                                 {"level_variation", r.level_variation},
                                 {"eigen_residual", r.eigen_residual},
                                 {"wedge", r.wedge},
                                 {"skipped", r.skipped}};
    Check c{"rectifiability", std::max({r.level_variation, r.eigen_residual, r.wedge}), 0.0, false, {}};
    c.pass = r.rectifiable && r.eigenvector && r.parallel && r.consistent;
    c.detail = "conditions (i)-(iii) all hold and agree";
    checks.push_back(c);
  }
  if (wanted(requested, "transnormal")) {
    const TransnormalReport t = transnormal_fit(s);
    json comps = json::array();
    for (const TransnormalFit& f : t.components) {
      comps.push_back(json{{"b_scatter", f.b_scatter},
                           {"a_scatter", f.a_scatter},
                           {"transnormal", f.transnormal},
                           {"isoparametric", f.isoparametric}});
    }
    const TransnormalFit& g = t.global;
    json global{{"b_scatter", g.b_scatter},
                {"a_scatter", g.a_scatter},
                {"transnormal", g.transnormal},
                {"isoparametric", g.isoparametric},
                {"segment_quadrature", g.segment_quadrature ? json(*g.segment_quadrature) : json(nullptr)},
                {"segment_traced", g.segment_traced ? json(*g.segment_traced) : json(nullptr)},
                {"segment_agrees", g.segment_agrees}};
    if (g.witness) {
      global["witness"] = json{{"first", g.witness->first},
                               {"second", g.witness->second},
                               {"f", g.witness->f},
                               {"value_first", g.witness->value_first},
                               {"value_second", g.witness->value_second}};
    }
    doc["transnormal"] = json{{"components", comps}, {"global", global}};
    Check c{"transnormal", std::max(g.b_scatter, g.a_scatter), 0.0, false, "transnormal and isoparametric"};
    c.pass = g.transnormal && g.isoparametric && g.segment_agrees;
    checks.push_back(c);
    if (fit_table) *fit_table = g.table;
  }
  if (wanted(requested, "hessian")) {
    const HessianSpectrum h = hessian_spectrum(s);
    doc["hessian"] = json{{"pair_deviation", h.pair_deviation}, {"slice_deviation", h.slice_deviation}};
    checks.push_back(bound_check("hessian.pairs", h.pair_deviation, tol("hessian")));
    checks.push_back(bound_check("hessian.slices", h.slice_deviation, tol("hessian")));
  }
  return checks;
}

const std::vector<std::string> kIdentityChecks{"soliton", "identities", "killing", "rectifiability", "transnormal",
                                               "hessian"};

std::vector<Check> verify_chart_model(const RunConfig& cfg, const ModelId& id, json& doc) {
  if (!cfg.deform.empty()) throw UsageError("--deform applies to almost-contact models only");
  require_known_checks(cfg.checks, kIdentityChecks, cfg.model);
  const ChartModelSample m = chart_model_sample(id);
  const Tolerances tol({{"identity", m.identity_tolerance}, {"killing", 1e-6}, {"hessian", 1e-7}}, cfg.tolerances);
  doc["model"] = model_name(id.kind);
  doc["points"] = m.sample.points.size();
  return identity_checks(m.sample, tol, cfg.checks, doc, nullptr);
}

/// At a collapsed end smooth profiles are odd or even in t about the end point; reflecting
/// the data there keeps the interpolant's derivatives accurate up to the end.
enum class Reflect { None, Odd, Even };

LocalPolynomial interpolant_through(const std::vector<double>& t, const std::vector<double>& y, Reflect lower,
                                    Reflect upper) {
  auto mirror = [](Reflect r, double end_value, double v) { return r == Reflect::Odd ? 2.0 * end_value - v : v; };
  constexpr std::size_t kMirrored = 8;
  const std::size_t n = t.size();
  const std::size_t m = std::min(kMirrored, n - 1);
  std::vector<double> xs, ys;
  if (lower != Reflect::None) {
    for (std::size_t i = m; i >= 1; --i) {
      xs.push_back(2.0 * t[0] - t[i]);
      ys.push_back(mirror(lower, y[0], y[i]));
    }
  }
  xs.insert(xs.end(), t.begin(), t.end());
  ys.insert(ys.end(), y.begin(), y.end());
  if (upper != Reflect::None) {
    for (std::size_t i = 1; i <= m; ++i) {
      xs.push_back(2.0 * t[n - 1] - t[n - 1 - i]);
      ys.push_back(mirror(upper, y[n - 1], y[n - 1 - i]));
    }
  }
  return LocalPolynomial(xs, ys);
}

std::vector<Check> verify_profile(const RunConfig& cfg, json& doc) {
  if (!cfg.checks.empty()) throw UsageError("--check is not available with --profile-dir");
  const Tolerances tol({{"profile", 1e-6}, {"columns", 1e-12}}, cfg.tolerances);
  const fs::path dir(cfg.profile_dir);
  const std::string csv_text = read_input(dir / "profile.csv");
  const std::string summary_text = read_input(dir / "summary.json");

  ProblemFile pf;
  CsvTable table;
  try {
    const nlohmann::json summary = nlohmann::json::parse(summary_text);
    pf = parse_problem(summary.at("problem").dump());
    table = parse_csv(csv_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("summary.json: " + std::string(e.what()));
  } catch (const InvalidInput& e) {
    throw DataError(e.what());
  }
  const SolitonProblem& p = pf.problem;

  std::vector<double> s, t, alpha, H, F, f;
  try {
    s = table.values("s");
    t = table.values("t");
    alpha = table.values("alpha");
    H = table.values("H");
    F = table.values("F");
    f = table.values("f");
  } catch (const InvalidInput& e) {
    throw DataError(std::string("profile.csv: ") + e.what());
  }
  if (t.size() < 8) throw DataError("profile.csv: need at least 8 rows");

  // Column consistency: alpha = H^2, F^2 = 2s + A, f = B s + C.
  double columns = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    columns = std::max({columns, std::abs(alpha[i] - H[i] * H[i]), std::abs(F[i] * F[i] - (2.0 * s[i] + p.A)),
                        std::abs(f[i] - (p.B * s[i] + p.C))});
  }

  // Thin out nodes much closer in t than average: they make the local polynomial weights large.
  const double span = t.back() - t.front();
  std::vector<double> tk{t.front()}, sk{s.front()}, Hk{H.front()}, Fk{F.front()}, fk{f.front()};
  for (std::size_t i = 1; i < t.size(); ++i) {
    const bool last = i + 1 == t.size();
    if (t[i] - tk.back() < 0.1 * span / static_cast<double>(t.size() - 1)) {
      if (!last) continue;
      tk.pop_back(), sk.pop_back(), Hk.pop_back(), Fk.pop_back(), fk.pop_back();
    }
    tk.push_back(t[i]), sk.push_back(s[i]), Hk.push_back(H[i]), Fk.push_back(F[i]), fk.push_back(f[i]);
  }
  if (tk.size() < 8) throw DataError("profile.csv: t column is not increasing");

  // At an end where H collapses, H is odd; F is odd when it collapses too, even otherwise;
  // f and s are even.
  const double h_scale = *std::max_element(Hk.begin(), Hk.end());
  const double f_scale = *std::max_element(Fk.begin(), Fk.end());
  auto collapsed = [](double v, double scale) { return std::abs(v) <= 1e-12 * scale; };
  const bool lower_end = collapsed(Hk.front(), h_scale), upper_end = collapsed(Hk.back(), h_scale);
  auto parity = [](bool end, bool odd) { return !end ? Reflect::None : odd ? Reflect::Odd : Reflect::Even; };
  WarpedProductMetric w;
  try {
    auto sH = std::make_shared<LocalPolynomial>(
        interpolant_through(tk, Hk, parity(lower_end, true), parity(upper_end, true)));
    auto sF = std::make_shared<LocalPolynomial>(interpolant_through(
        tk, Fk, parity(lower_end, collapsed(Fk.front(), f_scale)), parity(upper_end, collapsed(Fk.back(), f_scale))));
    auto sf = std::make_shared<LocalPolynomial>(
        interpolant_through(tk, fk, parity(lower_end, false), parity(upper_end, false)));
    auto ss = std::make_shared<LocalPolynomial>(
        interpolant_through(tk, sk, parity(lower_end, false), parity(upper_end, false)));
    w.t_min = tk.front();
    w.t_max = tk.back();
    w.H = [sH](double x) { return (*sH)(x); };
    w.F = [sF](double x) { return (*sF)(x); };
    w.f = [sf](double x) { return (*sf)(x); };
    w.s_of_t = [ss](double x) { return (*ss)(x).value; };
    w.base = einstein_base(p.n, p.k);
  } catch (const InvalidInput& e) {
    throw DataError(std::string("profile.csv: ") + e.what());
  }
  const SolitonResidual r = soliton_residual(w, p, cfg.grid_size);
  if (!cfg.output_dir.empty()) write_output(prepare_output(cfg) / "verify_residuals.csv", to_csv(residual_table(r, w)));

  doc["profile_dir"] = dir.string();
  doc["rows"] = t.size();
  doc["tolerances"] = tol.to_json();
  return {bound_check("columns", columns, tol("columns")),  bound_check("R1", r.R1, tol("profile")),
          bound_check("R2_zeta", r.R2_zeta, tol("profile")), bound_check("R2_horiz", r.R2_horiz, tol("profile")),
          bound_check("R3", r.R3, tol("profile")),           bound_check("R4", r.R4, tol("profile"))};
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.model.empty() == cfg.profile_dir.empty()) throw UsageError("verify needs exactly one of --model, --profile-dir");
  json doc;
  std::vector<Check> checks;
  if (!cfg.profile_dir.empty()) {
    checks = verify_profile(cfg, doc);
  } else {
    const ModelId id = resolve_model(cfg.model);
    checks = is_almost_contact_model(id.kind) ? verify_contact(cfg, doc) : verify_chart_model(cfg, id, doc);
  }
  doc["checks"] = checks_json(checks);
  doc["pass"] = all_pass(checks);
  emit(cfg, doc, "verify.json", out);
  report_failures(checks, err);
  return all_pass(checks) ? exit_code::ok : exit_code::check_failed;
}

// ---------------------------------------------------------------------------------------
// Reports

/// Plot-ready curvature along a tube: scalar and Ricci curvature, Hess f eigenvalues, and
/// b = |grad f|^2, a = Laplacian f.
CsvTable curvature_table(const WarpedProductMetric& w, int points) {
  CsvTable table;
  table.header = {"t", "s", "S", "Rc_N", "Rc_zeta", "Rc_horiz", "hess_N", "hess_zeta", "hess_horiz", "b", "a"};
  const Vector zeta = w.base.zeta;
  const Vector x = horizontal_basis(w.base).col(0);
  for (double t : interior_grid(w.t_min, w.t_max, points)) {
    const TubeRicci rc = tube_ricci(w, t);
    const Jet H = w.H(t), F = w.F(t), f = w.f(t);
    const ShapeProfile shape = shape_profile(w, t);
    const double rc_zeta = zeta.dot(rc.tangential * zeta) / zeta.dot(rc.slice_metric * zeta);
    const double rc_horiz = x.dot(rc.tangential * x) / x.dot(rc.slice_metric * x);
    table.rows.push_back({t, w.s_of_t ? w.s_of_t(t) : NAN, tube_scalar(rc), rc.normal, rc_zeta, rc_horiz, f.d2,
                          f.d1 * H.d1 / H.value, f.d1 * F.d1 / F.value, f.d1 * f.d1, f.d2 + f.d1 * shape.trace});
  }
  return table;
}

CsvTable fit_csv(const FitTable& fit) {
  CsvTable table;
  table.header = {"f", "b", "a"};
  for (std::size_t i = 0; i < fit.f.size(); ++i) table.rows.push_back({fit.f[i], fit.b[i], fit.a[i]});
  return table;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  const int sources = !cfg.model.empty() + !cfg.problem_file.empty() + !cfg.profile_dir.empty();
  if (sources != 1) throw UsageError("report needs exactly one of --model, --problem, --profile-dir");
  if (cfg.output_dir.empty()) throw UsageError("report needs --out DIR");
  require_known_checks(cfg.checks, kIdentityChecks, "report");

  json doc;
  FitTable fit;
  const fs::path dir = prepare_output(cfg);
  if (!cfg.model.empty()) {
    const ModelId id = resolve_model(cfg.model);
    if (is_almost_contact_model(id.kind)) throw UsageError("report needs a soliton model or problem");
    const ChartModelSample m = chart_model_sample(id);
    const Tolerances tol({{"identity", m.identity_tolerance}, {"killing", 1e-6}, {"hessian", 1e-7}}, cfg.tolerances);
    doc["model"] = model_name(id.kind);
    doc["checks"] = checks_json(identity_checks(m.sample, tol, cfg.checks, doc, &fit));
  } else {
    ProblemFile pf;
    if (!cfg.problem_file.empty()) {
      pf = load_problem(cfg.problem_file);
    } else {
      const std::string text = read_input(fs::path(cfg.profile_dir) / "summary.json");
      try {
        pf = parse_problem(nlohmann::json::parse(text).at("problem").dump());
      } catch (const nlohmann::json::exception& e) {
        throw DataError("summary.json: " + std::string(e.what()));
      } catch (const InvalidInput& e) {
        throw DataError(e.what());
      }
    }
    const Tolerances tol({{"identity", 1e-5}, {"killing", 1e-6}, {"hessian", 1e-7}}, cfg.tolerances);
    const Pipeline pl = run_pipeline(pf, SolveOptions{});
    doc["problem"] = problem_json(pf);
    const SolitonSample s = tube_soliton_sample(pl.tube, pf.problem.lambda, 6, 2);
    doc["checks"] = checks_json(identity_checks(s, tol, cfg.checks, doc, &fit));
    write_output(dir / "curvature.csv", to_csv(curvature_table(pl.tube, cfg.grid_size)));
  }
  if (!fit.f.empty()) write_output(dir / "fit_table.csv", to_csv(fit_csv(fit)));
  emit(cfg, doc, "report.json", out);
  return exit_code::ok;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.command == "classify") return cmd_classify(cfg, out);
  if (cfg.command == "deform") return cmd_deform(cfg, out);
  if (cfg.command == "solve") return cmd_solve(cfg, out, err);
  if (cfg.command == "verify") return cmd_verify(cfg, out, err);
  return cmd_report(cfg, out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kaehler gradient Ricci soliton toolkit", "soliton-forge"};
  app.require_subcommand(1, 1);
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--out", cfg.output_dir, "Output directory");
    sub->add_option("--tol", cfg.tolerances, "Tolerance override name=value (repeatable)");
  };
  auto add_model = [&cfg](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "sphere3|sl2r|nil3|gaussian|cigar|hopf-hypersurface");
  };
  auto add_grid = [&cfg](CLI::App* sub) {
    sub->add_option("--grid", cfg.grid_size, "Residual grid size (>= 16)")->check(CLI::Range(16, 1 << 20));
  };

  CLI::App* classify_cmd = app.add_subcommand("classify", "Classify an almost-contact structure");
  add_model(classify_cmd);
  classify_cmd->add_option("--deform", cfg.deform, "Deformation [+|-]H:F");
  add_common(classify_cmd);

  CLI::App* deform_cmd = app.add_subcommand("deform", "Deform a structure and report its curvature");
  add_model(deform_cmd);
  deform_cmd->add_option("--deform", cfg.deform, "Deformation [+|-]H:F");
  add_common(deform_cmd);

  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a Calabi-ansatz soliton problem");
  solve_cmd->add_option("--problem", cfg.problem_file, "Problem JSON file");
  add_grid(solve_cmd);
  add_common(solve_cmd);

  CLI::App* verify_cmd = app.add_subcommand("verify", "Verify a model or a solved profile");
  add_model(verify_cmd);
  verify_cmd->add_option("--deform", cfg.deform, "Deformation [+|-]H:F");
  verify_cmd->add_option("--profile-dir", cfg.profile_dir, "Directory written by solve");
  verify_cmd->add_option("--check", cfg.checks, "Restrict to named checks (repeatable)");
  add_grid(verify_cmd);
  add_common(verify_cmd);

  CLI::App* report_cmd = app.add_subcommand("report", "Identity-suite report and plot-ready data");
  add_model(report_cmd);
  report_cmd->add_option("--problem", cfg.problem_file, "Problem JSON file");
  report_cmd->add_option("--profile-dir", cfg.profile_dir, "Directory written by solve");
  report_cmd->add_option("--check", cfg.checks, "Restrict to named checks (repeatable)");
  add_grid(report_cmd);
  add_common(report_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 consumes from the back
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return exit_code::usage;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    return dispatch(cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const MissingInput& e) {
    err << e.what() << '\n';
    return exit_code::no_input;
  } catch (const DataError& e) {
    err << "invalid input: " << e.what() << '\n';
    return exit_code::data;
  } catch (const OutputError& e) {
    err << e.what() << '\n';
    return kCantCreate;
  } catch (const EmptyProfile& e) {
    err << "empty profile: " << e.what() << '\n';
    return exit_code::empty_profile;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::check_failed;
  }
}

}  // namespace soliton_forge
