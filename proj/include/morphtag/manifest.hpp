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

#ifndef MORPHTAG_MANIFEST_HPP_
#define MORPHTAG_MANIFEST_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morphtag {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

// Reproducibility record written beside every produced artifact: the exact
// command, the resolved config hash, input files with content digests, and
// the seeds involved.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::vector<std::uint64_t> seeds;
  std::string toolkit_version{kToolkitVersion};
  std::string created_utc;

  static RunManifest begin(int argc, char** argv);
  void add_input(const std::string& path);
  void write(const std::string& path) const;
};

// FNV-1a 64-bit digest, hex encoded.
std::string fnv1a64_hex(std::string_view bytes);
std::string file_digest(const std::string& path);

// Current time as ISO-8601 UTC.
std::string utc_timestamp();

}  // namespace morphtag

#endif  // MORPHTAG_MANIFEST_HPP_
