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

#ifndef MORPHTAG_CHECKPOINT_HPP_
#define MORPHTAG_CHECKPOINT_HPP_

#include <string>
#include <vector>

#include "morphtag/tagger.hpp"

namespace morphtag {

// Self-sufficient model checkpoint: a binary container holding the model
// configuration, the vocabulary, and every parameter tensor as named
// f64 row-major little-endian payloads. The byte layout is documented in
// docs/checkpoint-format.md and pinned by a golden-file test.

// Serializes a model to bytes / writes it to a file.
std::vector<std::uint8_t> serialize_model(const TaggerModel& model);
void save_model(const TaggerModel& model, const std::string& path);

// Restores a model; the result tags identically to the saved one.
TaggerModel deserialize_model(const std::vector<std::uint8_t>& bytes,
                              const std::string& source_name);
TaggerModel load_model(const std::string& path);

}  // namespace morphtag

#endif  // MORPHTAG_CHECKPOINT_HPP_
