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

#ifndef MORPHTAG_VOCAB_HPP_
#define MORPHTAG_VOCAB_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphtag/corpus.hpp"

namespace morphtag {

// Index maps for morphemes, characters and tags. Morpheme ids 0..2 are
// reserved (UNK, PAD, word boundary); kept morphemes follow densely in first
// occurrence order. Character id 0 is the unknown character. Tag ids cover
// exactly the tags observed in training data.
class Vocabulary {
 public:
  static constexpr int kUnkId = 0;
  static constexpr int kPadId = 1;
  static constexpr int kBoundaryId = 2;
  static constexpr int kFirstMorphemeId = 3;
  static constexpr int kUnkCharId = 0;
  static constexpr int kFirstCharId = 1;

  Vocabulary() = default;

  // Looks up a morpheme, folding case when the vocabulary was built with
  // lowercase=true. Unseen morphemes map to kUnkId.
  int morpheme_id(std::string_view text) const;

  // Codepoint ids for a morpheme's characters (kUnkCharId for unseen ones).
  std::vector<int> char_ids(std::string_view text) const;

  // Tag id, or -1 when the tag was not seen in training.
  int tag_id(const std::string& tag) const;
  const std::string& tag_name(int id) const;

  int word_boundary_id() const { return kBoundaryId; }
  int morpheme_table_size() const {
    return kFirstMorphemeId + static_cast<int>(morphemes_by_id_.size());
  }
  int char_table_size() const {
    return kFirstCharId + static_cast<int>(chars_by_id_.size());
  }
  int tag_count() const { return static_cast<int>(tags_by_id_.size()); }
  int min_count() const { return min_count_; }
  bool lowercase() const { return lowercase_; }

  const std::vector<std::string>& tags() const { return tags_by_id_; }

  // Line-oriented serialization: a version line followed by
  // `kind TAB symbol TAB id` records. Stable across save/load.
  std::string to_text() const;
  static Vocabulary from_text(std::string_view text,
                              const std::string& source_name);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& other) const;

  friend Vocabulary build_vocabulary(const Corpus& train, int min_count,
                                     bool lowercase);

 private:
  std::unordered_map<std::string, int> morpheme_to_id_;
  std::vector<std::string> morphemes_by_id_;  // index = id - kFirstMorphemeId
  std::unordered_map<std::uint32_t, int> char_to_id_;
  std::vector<std::uint32_t> chars_by_id_;  // index = id - kFirstCharId
  std::unordered_map<std::string, int> tag_to_id_;
  std::vector<std::string> tags_by_id_;
  int min_count_ = 2;
  bool lowercase_ = false;
};

// Counts morphemes in the training corpus and keeps those with count >=
// min_count; rarer ones fall back to UNK at encode time. The character
// inventory and tag set are exhaustive over the training data. When
// lowercase=true, counting and lookup operate on case-folded morpheme text
// (tags are never folded).
Vocabulary build_vocabulary(const Corpus& train, int min_count = 2,
                            bool lowercase = false);

enum class ContextMode { word, sentence };

std::string to_string(ContextMode mode);
ContextMode context_mode_from_string(const std::string& s);

// In training mode an unseen gold tag is an error; in evaluation mode it is
// retained as a string and its id position holds -1.
enum class EncodeMode { training, evaluation };

// One model input sequence: a word in word mode, a whole sentence (with
// boundary positions between words) in sentence mode. Boundary positions
// carry the boundary morpheme id, an empty character list, no gold tag, and
// are masked from the loss.
struct EncodedSequence {
  std::vector<int> morpheme_ids;
  std::vector<std::vector<int>> char_ids;
  std::vector<int> tag_ids;             // -1 where unsupervised or unknown
  std::vector<std::string> gold_tags;   // empty string at boundaries
  std::vector<std::uint8_t> supervised; // loss mask
  std::vector<int> word_index;          // -1 at boundaries
  int n_words = 0;

  int length() const { return static_cast<int>(morpheme_ids.size()); }
  int supervised_count() const;
};

EncodedSequence encode_word(const AnnotatedWord& word, const Vocabulary& vocab,
                            EncodeMode mode);
EncodedSequence encode_sentence(const Sentence& sentence,
                                const Vocabulary& vocab, EncodeMode mode);

// Encodes every instance of a corpus under the given context level: one
// sequence per word in word mode, one per sentence in sentence mode.
std::vector<EncodedSequence> encode_corpus(const Corpus& corpus,
                                           const Vocabulary& vocab,
                                           ContextMode context,
                                           EncodeMode mode);

// Untagged variants used at inference time.
EncodedSequence encode_segmented_word(const SegmentedWord& word,
                                      const Vocabulary& vocab);
EncodedSequence encode_segmented_sentence(const SegmentedSentence& sentence,
                                          const Vocabulary& vocab);

}  // namespace morphtag

#endif  // MORPHTAG_VOCAB_HPP_
