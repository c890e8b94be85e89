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

#include "qetsim/config.hpp"

#include <fstream>
#include <sstream>

namespace qet::config {

Reader::Reader(const nlohmann::json& node, std::string path) : node_(&node), path_(std::move(path)) {
  if (!node.is_object()) {
    throw ConfigError((path_.empty() ? std::string("<root>") : path_) + ": expected an object");
  }
}

bool Reader::has(const std::string& key) const {
  return node_->contains(key) && !(*node_)[key].is_null();
}

std::string Reader::path_of(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

Reader Reader::child(const std::string& key) {
  if (!has(key)) throw ConfigError(path_of(key) + ": required section missing");
  used_.insert(key);
  return Reader((*node_)[key], path_of(key));
}

std::optional<Reader> Reader::optional_child(const std::string& key) {
  if (!has(key)) {
    if (node_->contains(key)) used_.insert(key);
    return std::nullopt;
  }
  return child(key);
}

std::vector<Reader> Reader::array(const std::string& key) {
  std::vector<Reader> out;
  if (!has(key)) return out;
  used_.insert(key);
  const auto& arr = (*node_)[key];
  if (!arr.is_array()) throw ConfigError(path_of(key) + ": expected an array");
  for (std::size_t k = 0; k < arr.size(); ++k) {
    out.emplace_back(arr[k], path_of(key) + "[" + std::to_string(k) + "]");
  }
  return out;
}

void Reader::finish() const {
  for (const auto& item : node_->items()) {
    if (!used_.count(item.key())) throw ConfigError(path_of(item.key()) + ": unknown key");
  }
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace qet::config
