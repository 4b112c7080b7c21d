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

#include "morphtag/crf.hpp"

#include <string>

namespace morphtag {

namespace {

void check_crf_shapes(const Tensor& emissions, const Tensor& transitions,
                      const Tensor& start, const Tensor& end) {
  const int t = emissions.cols();
  if (transitions.rows() != t || transitions.cols() != t) {
    throw ShapeMismatch("crf: transitions " + transitions.shape_str() +
                        " vs emissions " + emissions.shape_str());
  }
  if (start.rows() != 1 || start.cols() != t || end.rows() != 1 ||
      end.cols() != t) {
    throw ShapeMismatch("crf: start " + start.shape_str() + " / end " +
                        end.shape_str() + " vs emissions " +
                        emissions.shape_str());
  }
}

}  // namespace

Tensor crf_log_partition(const Tensor& emissions, const Tensor& transitions,
                         const Tensor& start, const Tensor& end) {
  check_crf_shapes(emissions, transitions, start, end);
  const int len = emissions.rows();
  const int t = emissions.cols();
  Tensor alpha = add(start, row(emissions, 0));
  for (int l = 1; l < len; ++l) {
    // scores[i][j] = alpha[i] + trans[i][j], reduced over the source tag i
    Tensor scores = add_colvec(transitions, reshape(alpha, t, 1));
    alpha = add(logsumexp(scores, 0), row(emissions, l));
  }
  return logsumexp(add(alpha, end), 1);
}

Tensor crf_path_score(const Tensor& emissions, const Tensor& transitions,
                      const Tensor& start, const Tensor& end,
                      const std::vector<int>& tags) {
  check_crf_shapes(emissions, transitions, start, end);
  const int len = emissions.rows();
  if (static_cast<int>(tags.size()) != len) {
    throw ShapeMismatch("crf_path_score: " + std::to_string(tags.size()) +
                        " tags for " + std::to_string(len) + " positions");
  }
  std::vector<std::pair<int, int>> emission_idx;
  emission_idx.reserve(tags.size());
  for (int l = 0; l < len; ++l) emission_idx.emplace_back(l, tags[l]);
  Tensor score = sum_all(pick(emissions, emission_idx));
  score = add(score, pick(start, {{0, tags.front()}}));
  score = add(score, pick(end, {{0, tags.back()}}));
  if (len > 1) {
    std::vector<std::pair<int, int>> trans_idx;
    trans_idx.reserve(tags.size() - 1);
    for (int l = 1; l < len; ++l) trans_idx.emplace_back(tags[l - 1], tags[l]);
    score = add(score, sum_all(pick(transitions, trans_idx)));
  }
  return score;
}

ViterbiResult viterbi_decode(const Tensor& emissions, const Tensor& transitions,
                             const Tensor& start, const Tensor& end) {
  check_crf_shapes(emissions, transitions, start, end);
  const int len = emissions.rows();
  const int t = emissions.cols();
  const auto& e = emissions.values();
  const auto& tr = transitions.values();

  std::vector<double> best(static_cast<std::size_t>(t));
  for (int j = 0; j < t; ++j) best[j] = start.values()[j] + e[j];

  std::vector<int> backptr(static_cast<std::size_t>(len) * t, 0);
  std::vector<double> next(static_cast<std::size_t>(t));
  for (int l = 1; l < len; ++l) {
    for (int j = 0; j < t; ++j) {
      int arg = 0;
      double val = best[0] + tr[j];
      for (int i = 1; i < t; ++i) {
        const double cand = best[i] + tr[i * t + j];
        if (cand > val) {  // strict: ties keep the lowest source tag
          val = cand;
          arg = i;
        }
      }
      next[j] = val + e[l * t + j];
      backptr[l * t + j] = arg;
    }
    best.swap(next);
  }

  int arg = 0;
  double score = best[0] + end.values()[0];
  for (int j = 1; j < t; ++j) {
    const double cand = best[j] + end.values()[j];
    if (cand > score) {
      score = cand;
      arg = j;
    }
  }

  ViterbiResult result;
  result.score = score;
  result.tags.assign(static_cast<std::size_t>(len), 0);
  result.tags[len - 1] = arg;
  for (int l = len - 1; l > 0; --l) {
    result.tags[l - 1] = backptr[l * t + result.tags[l]];
  }
  return result;
}

}  // namespace morphtag
