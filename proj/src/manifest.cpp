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

#include "morphtag/manifest.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "morphtag/errors.hpp"

namespace morphtag {

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  for (int i = 60; i >= 0; i -= 4) out << ((h >> i) & 0xF);
  return out.str();
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64_hex(buf.str());
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

RunManifest RunManifest::begin(int argc, char** argv) {
  RunManifest m;
  std::ostringstream cmd;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) cmd << ' ';
    cmd << argv[i];
  }
  m.command = cmd.str();
  m.created_utc = utc_timestamp();
  return m;
}

void RunManifest::add_input(const std::string& path) {
  inputs.emplace_back(path, file_digest(path));
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json inputs_json = nlohmann::json::array();
  for (const auto& [p, digest] : inputs) {
    inputs_json.push_back({{"path", p}, {"digest", "fnv1a64:" + digest}});
  }
  const nlohmann::json j{{"command", command},
                         {"config_hash", config_hash},
                         {"inputs", inputs_json},
                         {"seeds", seeds},
                         {"toolkit_version", toolkit_version},
                         {"created_utc", created_utc}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write error: " + path);
}

}  // namespace morphtag
