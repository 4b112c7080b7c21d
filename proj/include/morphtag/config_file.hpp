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

#ifndef MORPHTAG_CONFIG_FILE_HPP_
#define MORPHTAG_CONFIG_FILE_HPP_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "morphtag/errors.hpp"

namespace morphtag {

// Plain-text configuration: one `key = value` per line, '#' comments, and
// bracketed lists `key = [a, b, c]` where a grid is allowed. Order is
// preserved; duplicate keys are errors.
using ConfigValues = std::vector<std::pair<std::string, std::string>>;
using GridAxes = std::vector<std::pair<std::string, std::vector<std::string>>>;

// Scalar-only variant: a list value is a ConfigError.
ConfigValues parse_config_text(std::string_view text,
                               const std::string& source_name);
ConfigValues load_config(const std::string& path);

// Grid variant: every value is an axis (singleton for scalars).
GridAxes parse_grid_text(std::string_view text, const std::string& source_name);
GridAxes load_grid(const std::string& path);

}  // namespace morphtag

#endif  // MORPHTAG_CONFIG_FILE_HPP_
