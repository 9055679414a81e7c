// Copyright 2026 The cgain Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cgain/error.hpp"

namespace cgain {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    std::string field = trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') field = field.substr(1, field.size() - 2);
    out.push_back(std::move(field));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Parses a full-string double, including hex-float notation.
inline bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size();
}

/// Shortest text that parses back to exactly `v`.
inline std::string format_exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Hex-float text, for bit-exact persistence.
inline std::string format_hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

/// Flat `key = value` document with `[section]` headers and `#` comments.
/// Keys inside a section are stored as `section.key`. Later assignments
/// override earlier ones.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& source = "<input>") {
    KeyValues kv;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (t.front() == '[') {
        require(t.back() == ']', ErrorKind::kConfig, source + ":" + std::to_string(lineno) + ": bad section header");
        section = trim(std::string_view(t).substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      require(eq != std::string::npos, ErrorKind::kConfig,
              source + ":" + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(std::string_view(t).substr(0, eq));
      require(!key.empty(), ErrorKind::kConfig, source + ":" + std::to_string(lineno) + ": empty key");
      if (!section.empty()) key = section + "." + key;
      kv.set(key, trim(std::string_view(t).substr(eq + 1)));
    }
    return kv;
  }

  static KeyValues parse_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::kConfig, "cannot open " + path);
    return parse(in, path);
  }

  static KeyValues parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  void set(const std::string& key, std::string value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = std::move(value);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    require(it != values_.end(), ErrorKind::kConfig, "missing key '" + key + "'");
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const {
    double v = 0.0;
    require(parse_double(get(key), v), ErrorKind::kConfig, "key '" + key + "' is not a number: " + get(key));
    return v;
  }

  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::size_t get_count(const std::string& key) const {
    const double v = get_double(key);
    require(v >= 0.0 && v == static_cast<double>(static_cast<std::size_t>(v)), ErrorKind::kConfig,
            "key '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  std::size_t get_count_or(const std::string& key, std::size_t fallback) const {
    return has(key) ? get_count(key) : fallback;
  }

  std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& f : split_fields(get(key), ',')) {
      if (f.empty()) continue;
      double v = 0.0;
      require(parse_double(f, v), ErrorKind::kConfig, "key '" + key + "' has non-numeric item '" + f + "'");
      out.push_back(v);
    }
    return out;
  }

  std::vector<std::string> get_words(const std::string& key) const {
    std::vector<std::string> out;
    for (auto& f : split_fields(get(key), ',')) {
      if (!f.empty()) out.push_back(std::move(f));
    }
    return out;
  }

  /// Keys in first-assignment order.
  const std::vector<std::string>& keys() const noexcept { return order_; }

  /// Canonical `key = value` text in first-assignment order.
  std::string to_string() const {
    std::string out;
    for (const auto& k : order_) out += k + " = " + values_.at(k) + "\n";
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cgain
