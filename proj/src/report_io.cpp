#include "soliton_forge/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "soliton_forge/errors.hpp"

namespace soliton_forge {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

ProblemFile parse_problem(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("malformed problem JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("problem JSON must be an object");

  static const std::set<std::string> known{"lambda", "k", "n", "A", "B", "C", "s_min", "s_max", "alpha_init"};
  for (const auto& item : doc.items()) {
    if (!known.count(item.key())) throw InvalidInput("unknown problem key '" + item.key() + "'");
  }
  auto real = [&](const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number()) throw InvalidInput(std::string("problem key '") + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw InvalidInput(std::string("problem key '") + key + "' must be finite");
    return x;
  };

  ProblemFile out;
  SolitonProblem& p = out.problem;
  p.lambda = real("lambda", p.lambda);
  p.k = real("k", p.k);
  if (doc.contains("n")) {
    const auto& v = doc.at("n");
    if (!v.is_number_integer()) throw InvalidInput("problem key 'n' must be an integer");
    p.n = v.get<int>();
  }
  p.A = real("A", p.A);
  p.B = real("B", p.B);
  p.C = real("C", p.C);
  p.s_min = real("s_min", p.s_min);
  p.s_max = real("s_max", p.s_max);
  out.alpha_init = real("alpha_init", 0.0);
  validate_problem(p);
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::filesystem::filesystem_error("cannot open", path,
                                            std::make_error_code(std::errc::no_such_file_or_directory));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::filesystem::filesystem_error("cannot write", path,
                                            std::make_error_code(std::errc::permission_denied));
  }
  out << text;
  if (!out) {
    throw std::filesystem::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InvalidInput("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_real(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_real(const std::string& field, std::size_t line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw InvalidInput("CSV line " + std::to_string(line_no) + ": cannot parse '" + field + "'");
  }
  return v;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw InvalidInput("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                         " fields, header has " + std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_real(f, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw InvalidInput("CSV is empty");
  return table;
}

CsvTable profile_table(const AlphaProfile& profile, const WarpedProductMetric& w, const SolitonProblem& p) {
  if (!w.t_of_s) throw InvalidInput("profile_table needs a Calabi tube");
  CsvTable table;
  table.header = {"s", "t", "alpha", "H", "F", "f"};
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    const double s = profile.grid[i];
    const double alpha = std::max(profile.alpha[i], 0.0);
    table.rows.push_back({s, w.t_of_s(s), profile.alpha[i], std::sqrt(alpha), std::sqrt(2.0 * s + p.A),
                          p.B * s + p.C});
  }
  return table;
}

CsvTable residual_table(const SolitonResidual& r, const WarpedProductMetric& w) {
  CsvTable table;
  table.header = {"s", "t", "alpha", "H", "F", "f", "R1", "R2_zeta", "R2_horiz", "R3", "R4"};
  for (const ResidualRow& row : r.rows) {
    const double H = w.H(row.t).value;
    table.rows.push_back({row.s, row.t, H * H, H, w.F(row.t).value, w.f(row.t).value, row.R1, row.R2_zeta,
                          row.R2_horiz, row.R3, row.R4});
  }
  return table;
}

}  // namespace soliton_forge
