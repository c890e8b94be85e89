// Copyright 2026 The qetsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once
// Strict reader over a JSON config tree: every key must be consumed, and
// errors name the offending field by its dotted path.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "qetsim/error.hpp"

namespace qet::config {

class Reader {
 public:
  Reader(const nlohmann::json& node, std::string path);

  bool has(const std::string& key) const;
  std::string path_of(const std::string& key) const;

  template <class T>
  T get(const std::string& key) {
    if (!has(key)) throw ConfigError(path_of(key) + ": required field missing");
    return convert<T>(key);
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? convert<T>(key) : fallback;
  }

  Reader child(const std::string& key);
  std::optional<Reader> optional_child(const std::string& key);
  std::vector<Reader> array(const std::string& key);

  /// Throws ConfigError naming the first key that was never read.
  void finish() const;

  const nlohmann::json& node() const { return *node_; }

 private:
  template <class T>
  T convert(const std::string& key) {
    used_.insert(key);
    try {
      return (*node_)[key].get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(path_of(key) + ": wrong type (got " +
                        std::string((*node_)[key].type_name()) + ")");
    }
  }

  const nlohmann::json* node_;
  std::string path_;
  std::set<std::string> used_;
};

/// Parses a file; syntax errors become ConfigError with the file name.
nlohmann::json load_json(const std::string& path);

}  // namespace qet::config
