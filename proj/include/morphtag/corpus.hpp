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

#ifndef MORPHTAG_CORPUS_HPP_
#define MORPHTAG_CORPUS_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "morphtag/errors.hpp"

namespace morphtag {

// One morpheme as written in an analysis. `elided` marks morphemes that the
// source wrapped in parentheses, e.g. the "(li)" of
// "ku[LocPre]-i[NPrePre5]-(li)[BPre5]-bhunga[NStem]": canonical morphemes
// that leave no trace in the composed word. The parentheses themselves are
// stripped; `text` never contains '[', ']' or '-'.
struct Morpheme {
  std::string text;
  bool elided = false;

  bool operator==(const Morpheme&) const = default;
};

// A morpheme together with its grammatical tag.
struct TaggedMorpheme {
  Morpheme morpheme;
  std::string tag;

  bool operator==(const TaggedMorpheme&) const = default;
};

// A word with its ordered morphological analysis. The atomic supervision
// unit: every morpheme carries exactly one tag.
struct AnnotatedWord {
  std::string raw_word;
  std::vector<TaggedMorpheme> analysis;

  bool operator==(const AnnotatedWord&) const = default;
};

struct Sentence {
  std::vector<AnnotatedWord> words;

  bool operator==(const Sentence&) const = default;
};

enum class SegmentationKind { canonical, surface };

std::string to_string(SegmentationKind kind);
SegmentationKind segmentation_kind_from_string(const std::string& s);

// A loaded corpus. `kind` is fixed per file: canonical and surface
// segmentations are never mixed.
struct Corpus {
  std::vector<Sentence> sentences;
  std::string language_id;
  SegmentationKind kind = SegmentationKind::canonical;

  std::size_t word_count() const;
  std::size_t morpheme_count() const;
};

// A segmented but untagged word, the tagger's inference-time input.
// `raw_word` may be reconstructed (concatenation of non-elided morphemes)
// when the source file carries no raw form.
struct SegmentedWord {
  std::string raw_word;
  std::vector<Morpheme> morphemes;
};

using SegmentedSentence = std::vector<SegmentedWord>;

// Parses one analysis string, e.g. "a[RelConc6]-li[BPre5]-qela[NStem]".
// Grammar: unit ("-" unit)*, unit = morph "[" tag "]", where a morph wrapped
// in parentheses is elided. Throws MalformedAnalysis with the byte offset of
// the offence. The returned word has an empty raw_word; callers that know
// the raw form fill it in.
AnnotatedWord parse_analysis(std::string_view raw);

// Inverse of parse_analysis: format_analysis(parse_analysis(s)) == s for
// every well-formed s.
std::string format_analysis(const AnnotatedWord& word);

// Renders the morphemes of a word in segmented-input form, e.g.
// "ku-i-(li)-bhunga".
std::string format_segmented(const std::vector<Morpheme>& morphemes);

// Parses corpus text in the two-column TSV format: one `raw_word TAB
// analysis` line per word, blank line between sentences, '#' comments.
// `source_name` is used in error messages.
Corpus parse_corpus_text(std::string_view text, SegmentationKind kind,
                         const std::string& source_name,
                         const std::string& language_id = "");

// Loads a corpus file. Throws IoError, MalformedAnalysis (with file/line
// context) or EmptyCorpus.
Corpus load_corpus(const std::string& path, SegmentationKind kind,
                   const std::string& language_id = "");

// Writes a corpus back in the same TSV format.
void save_corpus(const Corpus& corpus, const std::string& path);

// Loads segmented-only input: one word per line, morphemes joined by '-',
// parentheses marking elided morphemes, blank lines between sentences.
std::vector<SegmentedSentence> load_segmented(const std::string& path);
std::vector<SegmentedSentence> parse_segmented_text(
    std::string_view text, const std::string& source_name);

// Drops the tags of an annotated corpus, keeping raw words and morphemes.
std::vector<SegmentedSentence> strip_tags(const Corpus& corpus);

// Splits off a validation set at sentence granularity. Deterministic for a
// given seed; the two parts are disjoint and exhaustive, and each preserves
// the original sentence order.
std::pair<Corpus, Corpus> split_validation(const Corpus& corpus,
                                           double fraction,
                                           std::uint64_t seed);

// Decodes UTF-8 into codepoints. Invalid bytes are kept as single-byte
// codepoints so decoding is total.
std::vector<std::uint32_t> decode_utf8(std::string_view text);

// ASCII-only case folding; non-ASCII bytes pass through unchanged.
std::string fold_case(std::string_view text);

}  // namespace morphtag

#endif  // MORPHTAG_CORPUS_HPP_
