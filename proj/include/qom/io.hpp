#pragma once

// Deterministic CSV emission and flat key-value configuration files.
//
// CSV contract: '#'-prefixed header comment lines carrying the resolved
// parameters and package version, one header row, numeric cells printed with
// 12 significant digits, '.' decimal separator, Unix newlines.  Identical
// inputs produce byte-identical files.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qom {

inline constexpr const char* kPackageVersion = "0.1.0";

namespace io {

// Locale-independent 12-significant-digit formatting.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& comment_lines,
            const std::vector<std::string>& columns)
      : out_(path, std::ios::binary), ncols_(columns.size()) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    out_ << "# version=" << kPackageVersion << "\n";
    for (const auto& line : comment_lines) out_ << "# " << line << "\n";
    for (size_t i = 0; i < columns.size(); ++i)
      out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
    out_ << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != ncols_) throw std::invalid_argument("CsvWriter: column count mismatch");
    for (size_t i = 0; i < cells.size(); ++i)
      out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    row(cells);
  }

 private:
  std::ofstream out_;
  size_t ncols_;
};

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Flat key = value files with optional [section] headers; keys inside a
// section are addressed as "section.key".  '#' starts a comment; arrays are
// comma-separated values.
class Config {
 public:
  Config() = default;

  static Config parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("Config: malformed line: " + line);
      std::string key = trim(line.substr(0, eq));
      if (!section.empty()) key = section + "." + key;
      cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(it->second, key);
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::int64_t v = 0;
    auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (res.ec != std::errc() || res.ptr != it->second.data() + it->second.size())
      throw std::invalid_argument("Config: not an integer: " + key + "=" + it->second);
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("Config: not a boolean: " + key + "=" + it->second);
  }

  std::vector<double> get_double_array(const std::string& key,
                                       const std::vector<double>& fallback = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::istringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), key));
    return out;
  }

  const std::map<std::string, std::string>& items() const { return values_; }

 private:
  static double to_double(const std::string& s, const std::string& key) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw std::invalid_argument("Config: not a number: " + key + "=" + s);
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace io
}  // namespace qom
