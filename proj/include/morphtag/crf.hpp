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

#ifndef MORPHTAG_CRF_HPP_
#define MORPHTAG_CRF_HPP_

#include <utility>
#include <vector>

#include "morphtag/tensor.hpp"

namespace morphtag {

// Linear-chain CRF scores. A path t_0..t_{L-1} over emissions e (L x T)
// scores start[t_0] + sum_l e[l][t_l] + sum_l trans[t_{l-1}][t_l] +
// end[t_{L-1}]. Boundary handling uses explicit start/end vectors instead of
// augmenting the tag set.

// Log partition over all T^L paths via the forward recursion
//   alpha[0] = start + e[0]
//   alpha[l][j] = logsumexp_i(alpha[l-1][i] + trans[i][j]) + e[l][j]
//   log Z = logsumexp_j(alpha[L-1][j] + end[j])
// Differentiable when the inputs live on a tape.
Tensor crf_log_partition(const Tensor& emissions, const Tensor& transitions,
                         const Tensor& start, const Tensor& end);

// Score of one tag path (scalar tensor, differentiable).
Tensor crf_path_score(const Tensor& emissions, const Tensor& transitions,
                      const Tensor& start, const Tensor& end,
                      const std::vector<int>& tags);

struct ViterbiResult {
  std::vector<int> tags;
  double score = 0.0;
};

// Max-score path under the same scoring, the forward recursion with max in
// place of logsumexp. Ties break toward the lowest tag id, both in the
// backpointers and in the final argmax. Operates on plain values (no tape).
ViterbiResult viterbi_decode(const Tensor& emissions, const Tensor& transitions,
                             const Tensor& start, const Tensor& end);

}  // namespace morphtag

#endif  // MORPHTAG_CRF_HPP_
