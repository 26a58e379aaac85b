#pragma once

// Plain-text `key = value` documents. '#' starts a comment, blank lines
// are ignored, list values are comma separated.

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hdbn/error.hpp"

namespace hdbn {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

class KeyValueDoc {
 public:
  static KeyValueDoc parse(const std::string& text) {
    KeyValueDoc doc;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string body = detail::trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw FormatError("line " + std::to_string(lineno) + ": expected key = value");
      std::string key = detail::trim(std::string_view(body).substr(0, eq));
      if (key.empty()) throw FormatError("line " + std::to_string(lineno) + ": empty key");
      if (doc.values_.count(key)) throw FormatError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      doc.values_[key] = detail::trim(std::string_view(body).substr(eq + 1));
    }
    return doc;
  }

  static KeyValueDoc load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }

  long long get_int(const std::string& key) const { return to_int(key, get_string(key)); }

  std::vector<long long> get_int_list(const std::string& key) const {
    std::vector<long long> out;
    const std::string v = get_string(key);
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = detail::trim(item);
      if (!t.empty()) out.push_back(to_int(key, t));
    }
    return out;
  }

  // Keys never read by any get_* call; used to reject typos.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) out.push_back(k);
    }
    return out;
  }

 private:
  static double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("'" + key + "' is not a number: " + v);
    return out;
  }

  static long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("'" + key + "' is not an integer: " + v);
    return out;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace hdbn
