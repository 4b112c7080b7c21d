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

#ifndef MORPHTAG_ERRORS_HPP_
#define MORPHTAG_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace morphtag {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File could not be read or written.
struct IoError : Error {
  using Error::Error;
};

// An analysis string violates the `morph[Tag]-morph[Tag]` grammar.
// `offset` is the byte offset of the first offending character.
struct MalformedAnalysis : Error {
  MalformedAnalysis(const std::string& msg, std::size_t offset_)
      : Error(msg), offset(offset_) {}
  std::size_t offset = 0;
};

// A corpus file contained no sentences.
struct EmptyCorpus : Error {
  using Error::Error;
};

// A gold tag was not present in the vocabulary (training mode only).
struct UnknownTag : Error {
  using Error::Error;
};

// Tensor operands have incompatible shapes.
struct ShapeMismatch : Error {
  using Error::Error;
};

// backward() was called on a non-scalar tensor.
struct NotScalar : Error {
  using Error::Error;
};

// A gradient contained NaN or Inf; the optimizer step was aborted.
struct NonFiniteGradient : Error {
  using Error::Error;
};

// Gold and prediction files disagree on sentence or word counts.
struct AlignmentError : Error {
  using Error::Error;
};

// Tagging was requested for an empty word or sentence.
struct EmptyInput : Error {
  using Error::Error;
};

// A configuration file or value is invalid.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace morphtag

#endif  // MORPHTAG_ERRORS_HPP_
