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

#include "morphtag/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace morphtag {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoError("read error: " + path);
  }
  return buf.str();
}

[[noreturn]] void malformed(const std::string& what, std::size_t offset) {
  std::ostringstream msg;
  msg << "malformed analysis at byte " << offset << ": " << what;
  throw MalformedAnalysis(msg.str(), offset);
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r' || s.front() == '\n')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string to_string(SegmentationKind kind) {
  return kind == SegmentationKind::canonical ? "canonical" : "surface";
}

SegmentationKind segmentation_kind_from_string(const std::string& s) {
  if (s == "canonical") return SegmentationKind::canonical;
  if (s == "surface") return SegmentationKind::surface;
  throw ConfigError("unknown segmentation kind: '" + s +
                    "' (expected 'canonical' or 'surface')");
}

std::size_t Corpus::word_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.words.size();
  return n;
}

std::size_t Corpus::morpheme_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) {
    for (const auto& w : s.words) n += w.analysis.size();
  }
  return n;
}

AnnotatedWord parse_analysis(std::string_view raw) {
  const std::string_view s = strip(raw);
  AnnotatedWord word;
  if (s.empty()) {
    malformed("empty analysis", 0);
  }
  std::size_t pos = 0;
  while (true) {
    // morph part: everything up to '['
    const std::size_t morph_start = pos;
    while (pos < s.size() && s[pos] != '[') {
      if (s[pos] == '-') {
        malformed("hyphen before '[' (missing tag?)", pos);
      }
      if (s[pos] == ']') {
        malformed("']' without matching '['", pos);
      }
      ++pos;
    }
    if (pos == s.size()) {
      malformed("expected '[' after morph", pos);
    }
    std::string morph(s.substr(morph_start, pos - morph_start));
    bool elided = false;
    if (morph.size() >= 2 && morph.front() == '(' && morph.back() == ')') {
      elided = true;
      morph = morph.substr(1, morph.size() - 2);
    }
    if (morph.empty()) {
      malformed("empty morph", morph_start);
    }
    ++pos;  // consume '['
    const std::size_t tag_start = pos;
    while (pos < s.size() && s[pos] != ']') {
      if (s[pos] == '[') {
        malformed("nested '['", pos);
      }
      ++pos;
    }
    if (pos == s.size()) {
      malformed("unbalanced '[': missing ']'", tag_start - 1);
    }
    std::string tag(s.substr(tag_start, pos - tag_start));
    if (tag.empty()) {
      malformed("empty tag", tag_start);
    }
    ++pos;  // consume ']'
    word.analysis.push_back({Morpheme{std::move(morph), elided}, std::move(tag)});
    if (pos == s.size()) {
      break;
    }
    if (s[pos] != '-') {
      malformed("expected '-' or end after ']'", pos);
    }
    ++pos;  // consume '-'
    if (pos == s.size()) {
      malformed("stray trailing hyphen", pos - 1);
    }
  }
  return word;
}

std::string format_analysis(const AnnotatedWord& word) {
  std::string out;
  for (std::size_t i = 0; i < word.analysis.size(); ++i) {
    const auto& [morpheme, tag] = word.analysis[i];
    if (i > 0) out += '-';
    if (morpheme.elided) out += '(';
    out += morpheme.text;
    if (morpheme.elided) out += ')';
    out += '[';
    out += tag;
    out += ']';
  }
  return out;
}

std::string format_segmented(const std::vector<Morpheme>& morphemes) {
  std::string out;
  for (std::size_t i = 0; i < morphemes.size(); ++i) {
    if (i > 0) out += '-';
    if (morphemes[i].elided) out += '(';
    out += morphemes[i].text;
    if (morphemes[i].elided) out += ')';
  }
  return out;
}

namespace {

// Shared line-walking for the two text formats. Calls on_word(line, line_no)
// for every content line and on_break() at blank lines.
template <typename WordFn, typename BreakFn>
void walk_lines(std::string_view text, WordFn&& on_word, BreakFn&& on_break) {
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) {
      if (begin == text.size()) break;
      end = text.size();
    }
    ++line_no;
    std::string_view line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    begin = end + 1;
    if (strip(line).empty()) {
      on_break();
    } else if (line[0] != '#') {
      on_word(line, line_no);
    }
  }
  on_break();
}

}  // namespace

Corpus parse_corpus_text(std::string_view text, SegmentationKind kind,
                         const std::string& source_name,
                         const std::string& language_id) {
  Corpus corpus;
  corpus.kind = kind;
  corpus.language_id = language_id;
  Sentence current;
  walk_lines(
      text,
      [&](std::string_view line, std::size_t line_no) {
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos) {
          throw MalformedAnalysis(source_name + ":" + std::to_string(line_no) +
                                      ": expected 'raw_word<TAB>analysis'",
                                  0);
        }
        if (line.find('\t', tab + 1) != std::string_view::npos) {
          throw MalformedAnalysis(source_name + ":" + std::to_string(line_no) +
                                      ": expected exactly 2 columns",
                                  0);
        }
        std::string_view raw_word = strip(line.substr(0, tab));
        if (raw_word.empty()) {
          throw MalformedAnalysis(
              source_name + ":" + std::to_string(line_no) + ": empty raw word",
              0);
        }
        AnnotatedWord word;
        try {
          word = parse_analysis(line.substr(tab + 1));
        } catch (const MalformedAnalysis& e) {
          throw MalformedAnalysis(source_name + ":" + std::to_string(line_no) +
                                      ": " + e.what(),
                                  e.offset);
        }
        word.raw_word = std::string(raw_word);
        current.words.push_back(std::move(word));
      },
      [&]() {
        if (!current.words.empty()) {
          corpus.sentences.push_back(std::move(current));
          current = Sentence{};
        }
      });
  if (corpus.sentences.empty()) {
    throw EmptyCorpus("no sentences in " + source_name);
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, SegmentationKind kind,
                   const std::string& language_id) {
  return parse_corpus_text(read_file(path), kind, path, language_id);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open file for writing: " + path);
  }
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    if (i > 0) out << '\n';
    for (const auto& word : corpus.sentences[i].words) {
      out << word.raw_word << '\t' << format_analysis(word) << '\n';
    }
  }
  if (!out) {
    throw IoError("write error: " + path);
  }
}

std::vector<SegmentedSentence> parse_segmented_text(
    std::string_view text, const std::string& source_name) {
  std::vector<SegmentedSentence> sentences;
  SegmentedSentence current;
  walk_lines(
      text,
      [&](std::string_view line, std::size_t line_no) {
        std::string_view body = strip(line);
        SegmentedWord word;
        std::size_t begin = 0;
        while (begin <= body.size()) {
          std::size_t end = body.find('-', begin);
          if (end == std::string_view::npos) end = body.size();
          std::string piece(body.substr(begin, end - begin));
          bool elided = false;
          if (piece.size() >= 2 && piece.front() == '(' && piece.back() == ')') {
            elided = true;
            piece = piece.substr(1, piece.size() - 2);
          }
          if (piece.empty()) {
            throw MalformedAnalysis(source_name + ":" +
                                        std::to_string(line_no) +
                                        ": empty morph in segmented input",
                                    begin);
          }
          if (!elided) word.raw_word += piece;
          word.morphemes.push_back(Morpheme{std::move(piece), elided});
          if (end == body.size()) break;
          begin = end + 1;
        }
        current.push_back(std::move(word));
      },
      [&]() {
        if (!current.empty()) {
          sentences.push_back(std::move(current));
          current = SegmentedSentence{};
        }
      });
  return sentences;
}

std::vector<SegmentedSentence> load_segmented(const std::string& path) {
  return parse_segmented_text(read_file(path), path);
}

std::vector<SegmentedSentence> strip_tags(const Corpus& corpus) {
  std::vector<SegmentedSentence> out;
  out.reserve(corpus.sentences.size());
  for (const auto& sentence : corpus.sentences) {
    SegmentedSentence seg;
    seg.reserve(sentence.words.size());
    for (const auto& word : sentence.words) {
      SegmentedWord sw;
      sw.raw_word = word.raw_word;
      for (const auto& tm : word.analysis) sw.morphemes.push_back(tm.morpheme);
      seg.push_back(std::move(sw));
    }
    out.push_back(std::move(seg));
  }
  return out;
}

std::pair<Corpus, Corpus> split_validation(const Corpus& corpus,
                                           double fraction,
                                           std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split fraction must lie in (0, 1)");
  }
  const std::size_t n = corpus.sentences.size();
  std::size_t n_valid =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_valid > n) n_valid = n;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> in_valid(n, false);
  for (std::size_t i = 0; i < n_valid; ++i) in_valid[order[i]] = true;

  Corpus train{{}, corpus.language_id, corpus.kind};
  Corpus valid{{}, corpus.language_id, corpus.kind};
  for (std::size_t i = 0; i < n; ++i) {
    (in_valid[i] ? valid : train).sentences.push_back(corpus.sentences[i]);
  }
  return {std::move(train), std::move(valid)};
}

std::vector<std::uint32_t> decode_utf8(std::string_view text) {
  std::vector<std::uint32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    std::uint32_t cp = b0;
    if ((b0 & 0x80u) == 0) {
      len = 1;
    } else if ((b0 & 0xE0u) == 0xC0u) {
      len = 2;
      cp = b0 & 0x1Fu;
    } else if ((b0 & 0xF0u) == 0xE0u) {
      len = 3;
      cp = b0 & 0x0Fu;
    } else if ((b0 & 0xF8u) == 0xF0u) {
      len = 4;
      cp = b0 & 0x07u;
    } else {
      out.push_back(b0);  // invalid lead byte, keep as-is
      ++i;
      continue;
    }
    if (i + len > text.size()) {
      out.push_back(b0);
      ++i;
      continue;
    }
    bool ok = true;
    std::uint32_t decoded = cp;
    for (std::size_t k = 1; k < len; ++k) {
      const auto bk = static_cast<unsigned char>(text[i + k]);
      if ((bk & 0xC0u) != 0x80u) {
        ok = false;
        break;
      }
      decoded = (decoded << 6) | (bk & 0x3Fu);
    }
    if (!ok) {
      out.push_back(b0);
      ++i;
      continue;
    }
    out.push_back(decoded);
    i += len;
  }
  return out;
}

std::string fold_case(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(
        std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace morphtag
