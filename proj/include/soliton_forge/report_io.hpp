#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "soliton_forge/soliton_ode.hpp"

namespace soliton_forge {

/// 17 significant digits with '.' as decimal separator, independent of the locale, so
/// reruns are byte-identical and every double round-trips.
std::string format_real(double v);

/// Problem file: a JSON object with keys lambda, k, n, A, B, C, s_min, s_max, alpha_init.
/// Missing keys keep their defaults (alpha_init = 0).
struct ProblemFile {
  SolitonProblem problem;
  double alpha_init = 0.0;
};

/// Throws InvalidInput on malformed JSON, wrong value types, unknown keys or an invalid
/// problem.
ProblemFile parse_problem(const std::string& text);

/// Reads the file; throws std::filesystem::filesystem_error when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Column-major table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws InvalidInput when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

std::string to_csv(const CsvTable& table);
/// Throws InvalidInput on ragged rows or unparsable numbers.
CsvTable parse_csv(const std::string& text);

/// (s, t, alpha, H, F, f) at the integrator nodes of a Calabi tube.
CsvTable profile_table(const AlphaProfile& profile, const WarpedProductMetric& w, const SolitonProblem& p);

/// (s, t, alpha, H, F, f, R1, R2_zeta, R2_horiz, R3, R4) on the residual grid.
CsvTable residual_table(const SolitonResidual& r, const WarpedProductMetric& w);

}  // namespace soliton_forge
