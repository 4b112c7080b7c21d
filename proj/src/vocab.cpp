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

#include "morphtag/vocab.hpp"

#include <fstream>
#include <sstream>

namespace morphtag {

namespace {
constexpr std::string_view kVocabHeader = "morphtag-vocab 1";
}

int Vocabulary::morpheme_id(std::string_view text) const {
  const std::string key = lowercase_ ? fold_case(text) : std::string(text);
  auto it = morpheme_to_id_.find(key);
  return it == morpheme_to_id_.end() ? kUnkId : it->second;
}

std::vector<int> Vocabulary::char_ids(std::string_view text) const {
  const std::string folded = lowercase_ ? fold_case(text) : std::string(text);
  std::vector<int> ids;
  for (std::uint32_t cp : decode_utf8(folded)) {
    auto it = char_to_id_.find(cp);
    ids.push_back(it == char_to_id_.end() ? kUnkCharId : it->second);
  }
  return ids;
}

int Vocabulary::tag_id(const std::string& tag) const {
  auto it = tag_to_id_.find(tag);
  return it == tag_to_id_.end() ? -1 : it->second;
}

const std::string& Vocabulary::tag_name(int id) const {
  return tags_by_id_.at(static_cast<std::size_t>(id));
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  return morphemes_by_id_ == other.morphemes_by_id_ &&
         chars_by_id_ == other.chars_by_id_ &&
         tags_by_id_ == other.tags_by_id_ && min_count_ == other.min_count_ &&
         lowercase_ == other.lowercase_;
}

std::string Vocabulary::to_text() const {
  std::ostringstream out;
  out << kVocabHeader << '\n';
  out << "meta\tmin_count\t" << min_count_ << '\n';
  out << "meta\tlowercase\t" << (lowercase_ ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < morphemes_by_id_.size(); ++i) {
    out << "morpheme\t" << morphemes_by_id_[i] << '\t'
        << (kFirstMorphemeId + i) << '\n';
  }
  for (std::size_t i = 0; i < chars_by_id_.size(); ++i) {
    out << "char\t" << chars_by_id_[i] << '\t' << (kFirstCharId + i) << '\n';
  }
  for (std::size_t i = 0; i < tags_by_id_.size(); ++i) {
    out << "tag\t" << tags_by_id_[i] << '\t' << i << '\n';
  }
  return out.str();
}

Vocabulary Vocabulary::from_text(std::string_view text,
                                 const std::string& source_name) {
  Vocabulary vocab;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line != kVocabHeader) {
    throw IoError(source_name + ": not a morphtag vocabulary file");
  }
  auto fail = [&](const std::string& what) -> void {
    throw IoError(source_name + ":" + std::to_string(line_no + 1) + ": " +
                  what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 =
        t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) fail("expected 'kind<TAB>symbol<TAB>id'");
    const std::string kind = line.substr(0, t1);
    const std::string symbol = line.substr(t1 + 1, t2 - t1 - 1);
    long id = 0;
    try {
      id = std::stol(line.substr(t2 + 1));
    } catch (const std::exception&) {
      fail("bad id field");
    }
    if (kind == "meta") {
      if (symbol == "min_count") {
        vocab.min_count_ = static_cast<int>(id);
      } else if (symbol == "lowercase") {
        vocab.lowercase_ = id != 0;
      } else {
        fail("unknown meta key: " + symbol);
      }
    } else if (kind == "morpheme") {
      if (id != kFirstMorphemeId + static_cast<long>(vocab.morphemes_by_id_.size())) {
        fail("morpheme ids must be dense and in order");
      }
      vocab.morpheme_to_id_.emplace(symbol, static_cast<int>(id));
      vocab.morphemes_by_id_.push_back(symbol);
    } else if (kind == "char") {
      if (id != kFirstCharId + static_cast<long>(vocab.chars_by_id_.size())) {
        fail("char ids must be dense and in order");
      }
      std::uint32_t cp = 0;
      try {
        cp = static_cast<std::uint32_t>(std::stoul(symbol));
      } catch (const std::exception&) {
        fail("bad char codepoint field");
      }
      vocab.char_to_id_.emplace(cp, static_cast<int>(id));
      vocab.chars_by_id_.push_back(cp);
    } else if (kind == "tag") {
      if (id != static_cast<long>(vocab.tags_by_id_.size())) {
        fail("tag ids must be dense and in order");
      }
      vocab.tag_to_id_.emplace(symbol, static_cast<int>(id));
      vocab.tags_by_id_.push_back(symbol);
    } else {
      fail("unknown record kind: " + kind);
    }
  }
  return vocab;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << to_text();
  if (!out) throw IoError("write error: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path);
}

Vocabulary build_vocabulary(const Corpus& train, int min_count,
                            bool lowercase) {
  Vocabulary vocab;
  vocab.min_count_ = min_count;
  vocab.lowercase_ = lowercase;

  // First pass: counts in first-occurrence order.
  std::unordered_map<std::string, int> counts;
  std::vector<std::string> morpheme_order;
  for (const auto& sentence : train.sentences) {
    for (const auto& word : sentence.words) {
      for (const auto& tm : word.analysis) {
        const std::string key =
            lowercase ? fold_case(tm.morpheme.text) : tm.morpheme.text;
        if (++counts[key] == 1) morpheme_order.push_back(key);
        for (std::uint32_t cp : decode_utf8(key)) {
          if (vocab.char_to_id_.emplace(cp, vocab.char_table_size()).second) {
            vocab.chars_by_id_.push_back(cp);
          }
        }
        if (vocab.tag_to_id_.emplace(tm.tag, vocab.tag_count()).second) {
          vocab.tags_by_id_.push_back(tm.tag);
        }
      }
    }
  }
  for (const auto& key : morpheme_order) {
    if (counts[key] >= min_count) {
      vocab.morpheme_to_id_.emplace(key, vocab.morpheme_table_size());
      vocab.morphemes_by_id_.push_back(key);
    }
  }
  return vocab;
}

std::string to_string(ContextMode mode) {
  return mode == ContextMode::word ? "word" : "sentence";
}

ContextMode context_mode_from_string(const std::string& s) {
  if (s == "word") return ContextMode::word;
  if (s == "sentence") return ContextMode::sentence;
  throw ConfigError("unknown context mode: '" + s +
                    "' (expected 'word' or 'sentence')");
}

int EncodedSequence::supervised_count() const {
  int n = 0;
  for (auto flag : supervised) n += flag ? 1 : 0;
  return n;
}

namespace {

void append_morpheme(EncodedSequence& seq, const Morpheme& morpheme,
                     const std::string* tag, int word_idx,
                     const Vocabulary& vocab, EncodeMode mode) {
  seq.morpheme_ids.push_back(vocab.morpheme_id(morpheme.text));
  seq.char_ids.push_back(vocab.char_ids(morpheme.text));
  seq.word_index.push_back(word_idx);
  if (tag != nullptr) {
    const int id = vocab.tag_id(*tag);
    if (id < 0 && mode == EncodeMode::training) {
      throw UnknownTag("tag not in training vocabulary: " + *tag);
    }
    seq.tag_ids.push_back(id);
    seq.gold_tags.push_back(*tag);
    seq.supervised.push_back(1);
  } else {
    seq.tag_ids.push_back(-1);
    seq.gold_tags.emplace_back();
    seq.supervised.push_back(1);  // inference input: every position decoded
  }
}

void append_boundary(EncodedSequence& seq, const Vocabulary& vocab) {
  seq.morpheme_ids.push_back(vocab.word_boundary_id());
  seq.char_ids.emplace_back();
  seq.tag_ids.push_back(-1);
  seq.gold_tags.emplace_back();
  seq.supervised.push_back(0);
  seq.word_index.push_back(-1);
}

}  // namespace

EncodedSequence encode_word(const AnnotatedWord& word, const Vocabulary& vocab,
                            EncodeMode mode) {
  EncodedSequence seq;
  for (const auto& tm : word.analysis) {
    append_morpheme(seq, tm.morpheme, &tm.tag, 0, vocab, mode);
  }
  seq.n_words = 1;
  return seq;
}

EncodedSequence encode_sentence(const Sentence& sentence,
                                const Vocabulary& vocab, EncodeMode mode) {
  EncodedSequence seq;
  for (std::size_t w = 0; w < sentence.words.size(); ++w) {
    if (w > 0) append_boundary(seq, vocab);
    for (const auto& tm : sentence.words[w].analysis) {
      append_morpheme(seq, tm.morpheme, &tm.tag, static_cast<int>(w), vocab,
                      mode);
    }
  }
  seq.n_words = static_cast<int>(sentence.words.size());
  return seq;
}

std::vector<EncodedSequence> encode_corpus(const Corpus& corpus,
                                           const Vocabulary& vocab,
                                           ContextMode context,
                                           EncodeMode mode) {
  std::vector<EncodedSequence> out;
  for (const auto& sentence : corpus.sentences) {
    if (context == ContextMode::sentence) {
      out.push_back(encode_sentence(sentence, vocab, mode));
    } else {
      for (const auto& word : sentence.words) {
        out.push_back(encode_word(word, vocab, mode));
      }
    }
  }
  return out;
}

EncodedSequence encode_segmented_word(const SegmentedWord& word,
                                      const Vocabulary& vocab) {
  EncodedSequence seq;
  for (const auto& m : word.morphemes) {
    append_morpheme(seq, m, nullptr, 0, vocab, EncodeMode::evaluation);
  }
  seq.n_words = 1;
  return seq;
}

EncodedSequence encode_segmented_sentence(const SegmentedSentence& sentence,
                                          const Vocabulary& vocab) {
  EncodedSequence seq;
  for (std::size_t w = 0; w < sentence.size(); ++w) {
    if (w > 0) append_boundary(seq, vocab);
    for (const auto& m : sentence[w].morphemes) {
      append_morpheme(seq, m, nullptr, static_cast<int>(w), vocab,
                      EncodeMode::evaluation);
    }
  }
  seq.n_words = static_cast<int>(sentence.size());
  return seq;
}

}  // namespace morphtag
