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

#ifndef MORPHTAG_EVALUATION_HPP_
#define MORPHTAG_EVALUATION_HPP_

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "morphtag/corpus.hpp"

namespace morphtag {

// Multiset comparison of one word's gold and predicted tag sequences.
// Token counts come from the multiset intersection, so sequences of
// different lengths (upstream segmentation errors) still score sensibly:
// order is ignored and the intersection count of a tag is the minimum of
// its gold and predicted counts.
struct WordScore {
  std::map<std::string, int> gold;
  std::map<std::string, int> pred;
  std::map<std::string, int> intersection;

  int gold_total() const;
  int pred_total() const;
  int intersection_total() const;
};

WordScore score_word(const std::vector<std::string>& gold_tags,
                     const std::vector<std::string>& pred_tags);

struct MicroScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Corpus-pooled counts: precision = sum |intersection| / sum |pred|,
// recall over gold, F1 their harmonic mean (0 when both are 0).
MicroScore micro_f1(const std::vector<WordScore>& scores);

// Unweighted mean of per-tag F1 over the given universe. A universe tag
// with no gold and no predicted occurrences contributes an F1 of 0; callers
// that want the paper-style universe pass the union of observed tags.
double macro_f1(const std::vector<WordScore>& scores,
                const std::set<std::string>& tag_universe);

struct TagStats {
  long intersection = 0;
  long gold = 0;
  long pred = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::map<std::string, TagStats> per_tag;
  long word_count = 0;
  long mismatch_count = 0;  // words where |gold| != |pred|

  std::string to_text() const;
  std::string to_json_string() const;
  static EvalReport from_json_string(const std::string& text,
                                     const std::string& source);
};

// Builds the full report from per-word scores. The macro universe is the
// union of tags observed in gold and predictions.
EvalReport build_report(const std::vector<WordScore>& scores,
                        long mismatch_count);

// Scores two corpora aligned word-for-word by position. Sentence and
// per-sentence word counts must agree (AlignmentError otherwise); raw-word
// disagreements only produce warnings on `warnings` when given.
EvalReport evaluate_corpora(const Corpus& gold, const Corpus& pred,
                            std::ostream* warnings = nullptr);

// Loads and scores two corpus files in the standard TSV format.
EvalReport evaluate_files(const std::string& gold_path,
                          const std::string& pred_path,
                          std::ostream* warnings = nullptr);

}  // namespace morphtag

#endif  // MORPHTAG_EVALUATION_HPP_
