#include "config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace kqf::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

Scalar parse_scalar(const std::string& raw, const std::string& where) {
  const std::string t = trim(raw);
  if (t.empty()) throw ConfigError(where + ": missing value");
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"') throw ConfigError(where + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      if (t[i] == '\\' && i + 2 < t.size()) {
        const char n = t[++i];
        out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
      } else {
        out += t[i];
      }
    }
    return out;
  }
  if (t == "true") return true;
  if (t == "false") return false;
  std::string num;
  for (char c : t) {
    if (c != '_') num += c;
  }
  const bool looks_float = num.find_first_of(".eE") != std::string::npos || num == "inf" || num == "nan";
  if (!looks_float) {
    std::int64_t v = 0;
    const char* first = num.data() + (num.front() == '+' ? 1 : 0);
    const auto res = std::from_chars(first, num.data() + num.size(), v);
    if (res.ec == std::errc() && res.ptr == num.data() + num.size()) return v;
  } else {
    double v = 0.0;
    const char* first = num.data() + (num.front() == '+' ? 1 : 0);
    const auto res = std::from_chars(first, num.data() + num.size(), v);
    if (res.ec == std::errc() && res.ptr == num.data() + num.size()) return v;
  }
  throw ConfigError(where + ": cannot parse value '" + t + "'");
}

std::vector<std::string> split_array(const std::string& body, const std::string& where) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  for (char c : body) {
    if (c == '"') in_string = !in_string;
    if (c == ',' && !in_string) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_string) throw ConfigError(where + ": unterminated string in array");
  if (!trim(cur).empty()) items.push_back(cur);
  return items;
}

std::string type_name(const Scalar& s) {
  switch (s.index()) {
    case 0: return "boolean";
    case 1: return "integer";
    case 2: return "float";
    default: return "string";
  }
}

std::string render(const Scalar& s) {
  if (auto b = std::get_if<bool>(&s)) return *b ? "true" : "false";
  if (auto i = std::get_if<std::int64_t>(&s)) return std::to_string(*i);
  if (auto d = std::get_if<double>(&s)) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), *d);
    return std::string(buf, res.ptr);
  }
  return "\"" + std::get<std::string>(s) + "\"";
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section = "run";
  std::set<std::string> headers;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!valid_key(section)) throw ConfigError(where + ": invalid section name '" + section + "'");
      const bool reopened = !headers.insert(section).second;
      if (reopened || (cfg.sections_.count(section) && !cfg.sections_[section].empty())) {
        throw ConfigError(where + ": duplicate section [" + section + "]");
      }
      cfg.sections_[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (!valid_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
    const std::string rhs = trim(t.substr(eq + 1));
    Value v;
    v.line = lineno;
    if (!rhs.empty() && rhs.front() == '[') {
      if (rhs.back() != ']') throw ConfigError(where + ": arrays must close on the same line");
      std::vector<Scalar> items;
      for (const auto& item : split_array(rhs.substr(1, rhs.size() - 2), where)) {
        items.push_back(parse_scalar(item, where));
      }
      v.data = std::move(items);
    } else {
      v.data = parse_scalar(rhs, where);
    }
    auto& sec = cfg.sections_[section];
    if (sec.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    sec.emplace(key, std::move(v));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const Value* Config::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  used_.emplace(section, key);
  return &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) != 0;
}

namespace {

const Scalar& scalar_of(const Value& v, const std::string& what) {
  if (const auto* s = std::get_if<Scalar>(&v.data)) return *s;
  throw ConfigError(what + ": expected a scalar, found an array");
}

std::string label(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

}  // namespace

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
  return get_optional_string(section, key).value_or(fallback);
}

std::optional<std::string> Config::get_optional_string(const std::string& section, const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) return std::nullopt;
  const Scalar& s = scalar_of(*v, label(section, key));
  if (const auto* str = std::get_if<std::string>(&s)) return *str;
  throw ConfigError(label(section, key) + ": expected a string, found " + type_name(s));
}

std::int64_t Config::get_int(const std::string& section, const std::string& key, std::int64_t fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  const Scalar& s = scalar_of(*v, label(section, key));
  if (const auto* i = std::get_if<std::int64_t>(&s)) return *i;
  throw ConfigError(label(section, key) + ": expected an integer, found " + type_name(s));
}

std::optional<double> Config::get_optional_double(const std::string& section, const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) return std::nullopt;
  const Scalar& s = scalar_of(*v, label(section, key));
  if (const auto* d = std::get_if<double>(&s)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
  throw ConfigError(label(section, key) + ": expected a number, found " + type_name(s));
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  return get_optional_double(section, key).value_or(fallback);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  const Scalar& s = scalar_of(*v, label(section, key));
  if (const auto* b = std::get_if<bool>(&s)) return *b;
  throw ConfigError(label(section, key) + ": expected true or false, found " + type_name(s));
}

std::vector<std::int64_t> Config::get_int_list(const std::string& section, const std::string& key,
                                               const std::vector<std::int64_t>& fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<Scalar>(&v->data)) {
    if (const auto* i = std::get_if<std::int64_t>(s)) return {*i};
    throw ConfigError(label(section, key) + ": expected a list of integers");
  }
  std::vector<std::int64_t> out;
  for (const auto& s : std::get<std::vector<Scalar>>(v->data)) {
    const auto* i = std::get_if<std::int64_t>(&s);
    if (!i) throw ConfigError(label(section, key) + ": expected a list of integers, found " + type_name(s));
    out.push_back(*i);
  }
  return out;
}

std::vector<std::string> Config::get_string_list(const std::string& section, const std::string& key,
                                                 const std::vector<std::string>& fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<Scalar>(&v->data)) {
    if (const auto* str = std::get_if<std::string>(s)) return {*str};
    throw ConfigError(label(section, key) + ": expected a list of strings");
  }
  std::vector<std::string> out;
  for (const auto& s : std::get<std::vector<Scalar>>(v->data)) {
    const auto* str = std::get_if<std::string>(&s);
    if (!str) throw ConfigError(label(section, key) + ": expected a list of strings, found " + type_name(s));
    out.push_back(*str);
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key, Scalar v) {
  Value& slot = sections_[section][key];
  slot.data = std::move(v);
}

void Config::reject_unused(const std::set<std::string>& allowed_sections) const {
  for (const auto& [name, keys] : sections_) {
    if (!allowed_sections.count(name)) throw ConfigError(origin_ + ": unknown section [" + name + "]");
    for (const auto& [key, value] : keys) {
      if (!used_.count({name, key})) {
        throw ConfigError(origin_ + ":" + std::to_string(value.line) + ": unknown key '" + key + "' in [" + name + "]");
      }
    }
  }
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [name, keys] : sections_) {
    if (keys.empty()) continue;
    out += "[" + name + "]\n";
    for (const auto& [key, value] : keys) {
      out += key + " = ";
      if (const auto* s = std::get_if<Scalar>(&value.data)) {
        out += render(*s);
      } else {
        out += "[";
        const auto& items = std::get<std::vector<Scalar>>(value.data);
        for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + render(items[i]);
        out += "]";
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace kqf::cli
