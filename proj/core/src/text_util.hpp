// Copyright 2026 The vfpt Authors
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

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "vfpt/errors.hpp"

namespace vfpt::detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(d)) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return d;
}

inline std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  }
  if (pos != v.size() || v.find('-') != std::string::npos) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(n);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

// Walks "key = value" lines ('#' starts a comment), rejecting malformed and
// duplicate keys. `apply` receives (key, value) and may throw ConfigError,
// which is rethrown prefixed with source:line.
inline void for_each_entry(const std::string& text, const std::string& source,
                           const std::function<void(const std::string&, const std::string&)>& apply) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    try {
      apply(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
}

}  // namespace vfpt::detail
