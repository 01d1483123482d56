#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kqfactor/atoms.hpp"
#include "kqfactor/kq_norm.hpp"
#include "kqfactor/statdim.hpp"
#include "kqfactor/working_set.hpp"

namespace kqf {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that round-trips the double.
std::string format_double(double v);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json atom_to_json(const Atom& a);
Atom atom_from_json(const Json& j);
Json decomposition_to_json(const AtomicDecomposition& d);
AtomicDecomposition decomposition_from_json(const Json& j);

/// {"rows", "cols", "data", optional "decomposition"}.
Json fixture_to_json(const Matrix& m, const AtomicDecomposition* d = nullptr);

Json certificate_to_json(const DualCertificate& c);
Json solve_report_to_json(const SolveReport& r);

/// Dense matrix as CSV, one row per line. Blank lines and lines starting with '#' are skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// Reads a matrix from .csv or .json (fixture format). Optionally returns the decomposition.
Matrix load_matrix(const std::filesystem::path& path, AtomicDecomposition* decomposition = nullptr);

/// CSV table with a leading '#'-comment metadata block and a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
  void add_row(std::vector<std::string> row);
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<std::string>> rows_;
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace kqf
