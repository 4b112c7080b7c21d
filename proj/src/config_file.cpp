// Copyright 2026 The Morphtag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "morphtag/config_file.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace morphtag {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
    --e;
  }
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(const std::string& body,
                                    const std::string& where) {
  std::vector<std::string> items;
  std::size_t begin = 0;
  while (begin <= body.size()) {
    std::size_t end = body.find(',', begin);
    if (end == std::string::npos) end = body.size();
    const std::string item = trim(std::string_view(body).substr(begin, end - begin));
    if (item.empty()) {
      throw ConfigError(where + ": empty list element");
    }
    items.push_back(item);
    if (end == body.size()) break;
    begin = end + 1;
  }
  if (items.empty()) {
    throw ConfigError(where + ": empty list");
  }
  return items;
}

GridAxes parse_lines(std::string_view text, const std::string& source_name,
                     bool allow_lists) {
  GridAxes axes;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source_name + ":" + std::to_string(line_no);
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (value.empty()) throw ConfigError(where + ": empty value");
    if (std::any_of(axes.begin(), axes.end(),
                    [&](const auto& kv) { return kv.first == key; })) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    if (value.front() == '[') {
      if (!allow_lists) {
        throw ConfigError(where + ": list value not allowed for '" + key +
                          "' in a non-grid config");
      }
      if (value.back() != ']') {
        throw ConfigError(where + ": unterminated list");
      }
      axes.emplace_back(
          key, split_list(value.substr(1, value.size() - 2), where));
    } else {
      axes.emplace_back(key, std::vector<std::string>{value});
    }
  }
  return axes;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ConfigValues parse_config_text(std::string_view text,
                               const std::string& source_name) {
  ConfigValues values;
  for (auto& [key, list] : parse_lines(text, source_name, false)) {
    values.emplace_back(std::move(key), std::move(list.front()));
  }
  return values;
}

ConfigValues load_config(const std::string& path) {
  return parse_config_text(read_file(path), path);
}

GridAxes parse_grid_text(std::string_view text,
                         const std::string& source_name) {
  return parse_lines(text, source_name, true);
}

GridAxes load_grid(const std::string& path) {
  return parse_grid_text(read_file(path), path);
}

}  // namespace morphtag
