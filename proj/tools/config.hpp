#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace kqf::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Scalar = std::variant<bool, std::int64_t, double, std::string>;

struct Value {
  std::variant<Scalar, std::vector<Scalar>> data;
  int line = 0;
};

/// Flat sections of key = value pairs. Supports strings, integers, floats,
/// booleans and single-line arrays of those; '#' starts a comment.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
  bool has(const std::string& section, const std::string& key) const;

  /// Typed getters mark the key as consumed; absent keys yield the fallback.
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::optional<std::string> get_optional_string(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::optional<double> get_optional_double(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<std::int64_t> get_int_list(const std::string& section, const std::string& key,
                                         const std::vector<std::int64_t>& fallback) const;
  std::vector<std::string> get_string_list(const std::string& section, const std::string& key,
                                           const std::vector<std::string>& fallback) const;

  void set(const std::string& section, const std::string& key, Scalar v);

  /// Throws ConfigError naming the first section or key never read.
  void reject_unused(const std::set<std::string>& allowed_sections) const;

  /// Canonical text of the effective configuration (sorted sections and keys).
  std::string canonical() const;

 private:
  const Value* find(const std::string& section, const std::string& key) const;
  std::string origin_;
  std::map<std::string, std::map<std::string, Value>> sections_;
  mutable std::set<std::pair<std::string, std::string>> used_;
};

}  // namespace kqf::cli
