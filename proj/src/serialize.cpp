#include "kqfactor/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kqf {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("data")) throw std::invalid_argument("matrix JSON: missing 'data'");
  const Json& data = j.at("data");
  if (!data.is_array()) throw std::invalid_argument("matrix JSON: 'data' must be an array of rows");
  const Index rows = static_cast<Index>(data.size());
  const Index cols = rows ? static_cast<Index>(data.at(0).size()) : 0;
  if (j.contains("rows") && j.at("rows").get<Index>() != rows) throw std::invalid_argument("matrix JSON: row count mismatch");
  if (j.contains("cols") && j.at("cols").get<Index>() != cols) throw std::invalid_argument("matrix JSON: column count mismatch");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = data.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw std::invalid_argument("matrix JSON: ragged rows");
    for (Index c = 0; c < cols; ++c) {
      const Json& v = row.at(static_cast<std::size_t>(c));
      if (!v.is_number()) throw std::invalid_argument("matrix JSON: non-numeric entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

namespace {

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("JSON: expected a numeric array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

Json atom_to_json(const Atom& a) {
  return Json{{"left", vector_to_json(a.left)},
              {"right", vector_to_json(a.right)},
              {"left_support", a.left_support},
              {"right_support", a.right_support},
              {"flat", a.flat}};
}

Atom atom_from_json(const Json& j) {
  Atom a = make_atom(vector_from_json(j.at("left")), vector_from_json(j.at("right")));
  if (j.contains("left_support")) a.left_support = j.at("left_support").get<std::vector<Index>>();
  if (j.contains("right_support")) a.right_support = j.at("right_support").get<std::vector<Index>>();
  a.flat = j.value("flat", false);
  return a;
}

Json decomposition_to_json(const AtomicDecomposition& d) {
  Json terms = Json::array();
  for (const auto& t : d.terms) {
    Json term = atom_to_json(t.atom);
    term["weight"] = t.weight;
    terms.push_back(std::move(term));
  }
  return Json{{"rows", d.rows}, {"cols", d.cols}, {"terms", std::move(terms)}};
}

AtomicDecomposition decomposition_from_json(const Json& j) {
  AtomicDecomposition d;
  d.rows = j.at("rows").get<Index>();
  d.cols = j.at("cols").get<Index>();
  for (const Json& t : j.at("terms")) {
    DecompositionTerm term{t.at("weight").get<double>(), atom_from_json(t)};
    if (term.atom.left.size() != d.rows || term.atom.right.size() != d.cols) {
      throw std::invalid_argument("decomposition JSON: atom shape mismatch");
    }
    d.terms.push_back(std::move(term));
  }
  return d;
}

Json fixture_to_json(const Matrix& m, const AtomicDecomposition* d) {
  Json j = matrix_to_json(m);
  if (d) j["decomposition"] = decomposition_to_json(*d);
  return j;
}

Json certificate_to_json(const DualCertificate& c) {
  return Json{{"value", c.value},
              {"exact", c.exact},
              {"rows", c.support.rows},
              {"cols", c.support.cols},
              {"left", vector_to_json(c.left)},
              {"right", vector_to_json(c.right)}};
}

Json solve_report_to_json(const SolveReport& r) {
  return Json{{"objective_trace", r.objective_trace},
              {"certificate_value", r.certificate_value},
              {"certified", r.certified},
              {"stalled", r.stalled},
              {"kkt_residual", r.kkt_residual},
              {"outer_iterations", r.outer_iterations},
              {"inner_sweeps", r.inner_sweeps},
              {"atoms", decomposition_to_json(r.atoms)}};
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      if (b == std::string::npos) throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": empty cell");
      const std::string t = cell.substr(b, e - b + 1);
      double v = 0.0;
      const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + t + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(path.string() + ": no data rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_text(path, out);
}

Matrix load_matrix(const std::filesystem::path& path, AtomicDecomposition* decomposition) {
  if (path.extension() == ".json") {
    Json j;
    try {
      j = Json::parse(read_text(path));
    } catch (const Json::parse_error& e) {
      throw std::invalid_argument(path.string() + ": " + e.what());
    }
    Matrix m = matrix_from_json(j);
    if (decomposition && j.contains("decomposition")) *decomposition = decomposition_from_json(j.at("decomposition"));
    return m;
  }
  return read_matrix_csv(path);
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::logic_error("csv: row width does not match the header");
  rows_.push_back(std::move(row));
}

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  for (const auto& [k, v] : meta_) out += "# " + k + ": " + v + "\n";
  for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + csv_cell(header_[i]);
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace kqf
