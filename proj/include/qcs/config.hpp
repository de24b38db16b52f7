#pragma once

// Flat "key = value" configuration files and newline-delimited vector files.
// Both accept '#' comments and blank lines.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qcs/core.hpp"

namespace qcs {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

}  // namespace detail

inline double parse_double(const std::string& text, const std::string& what) {
  const std::string t = detail::trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw InputError(what + ": '" + t + "' is not a number");
  }
  if (used != t.size() || !std::isfinite(v)) throw InputError(what + ": '" + t + "' is not a finite number");
  return v;
}

inline long long parse_integer(const std::string& text, const std::string& what) {
  const std::string t = detail::trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw InputError(what + ": '" + t + "' is not an integer");
  return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "config") {
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string body = detail::trim(detail::strip_comment(line));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw InputError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = detail::trim(body.substr(0, eq));
      const std::string value = detail::trim(body.substr(eq + 1));
      if (key.empty()) throw InputError(source + ":" + std::to_string(lineno) + ": empty key");
      if (cfg.values_.count(key))
        throw InputError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? parse_double(values_.at(key), key) : fallback;
  }

  long long get_int(const std::string& key, long long fallback) const {
    return has(key) ? parse_integer(values_.at(key), key) : fallback;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

inline std::vector<std::string> read_value_lines(std::istream& in, const std::string& source) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string body = detail::trim(detail::strip_comment(line));
    if (!body.empty()) out.push_back(body);
  }
  if (out.empty()) throw InputError(source + ": no values");
  return out;
}

inline Vector read_vector(std::istream& in, const std::string& source = "vector") {
  const auto lines = read_value_lines(in, source);
  Vector v(static_cast<Index>(lines.size()));
  for (std::size_t i = 0; i < lines.size(); ++i)
    v(static_cast<Index>(i)) = parse_double(lines[i], source + " line " + std::to_string(i + 1));
  return v;
}

inline Vector read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_vector(in, path);
}

/// Reads 1-based indices and returns them 0-based.
inline std::vector<Index> read_index_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  const auto lines = read_value_lines(in, path);
  std::vector<Index> out;
  for (std::size_t i = 0; i < lines.size(); ++i)
    out.push_back(static_cast<Index>(parse_integer(lines[i], path + " line " + std::to_string(i + 1))) - 1);
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_vector(std::ostream& out, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

inline void write_vector_file(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_vector(out, v);
}

}  // namespace qcs
