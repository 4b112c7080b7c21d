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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "morphtag/tagger.hpp"
#include "test_util.hpp"

using namespace morphtag;

namespace {

Corpus tiny_corpus() {
  const std::string text =
      "ab\ta[T1]-b[T2]\n"
      "cd\tc[T3]-d[T1]\n"
      "\n"
      "ba\tb[T2]-a[T1]\n";
  return parse_corpus_text(text, SegmentationKind::canonical, "mem");
}

TaggerModel tiny_model(FeatureLevel level, ModelKind kind, ContextMode context,
                       std::uint64_t seed = 42) {
  const Corpus corpus = tiny_corpus();
  const Vocabulary vocab = build_vocabulary(corpus, 1, false);
  FeatureConfig features{level, false, 6};
  return init_model(vocab, features, kind, context, 5, 0.0, seed);
}

}  // namespace

TEST_CASE("char_sum embedding is invariant under character permutation") {
  const TaggerModel model =
      tiny_model(FeatureLevel::char_sum, ModelKind::bilstm, ContextMode::word);
  const BoundModel bound = bind(model, nullptr);

  AnnotatedWord ab, ba;
  ab.analysis = {{Morpheme{"ab", false}, "T1"}};
  ba.analysis = {{Morpheme{"ba", false}, "T1"}};
  const Tensor e_ab =
      embed(bound, encode_word(ab, model.vocab, EncodeMode::training));
  const Tensor e_ba =
      embed(bound, encode_word(ba, model.vocab, EncodeMode::training));
  CHECK(e_ab.values() == e_ba.values());
}

TEST_CASE("single-character morpheme embeds as that character's row") {
  const TaggerModel model =
      tiny_model(FeatureLevel::char_sum, ModelKind::bilstm, ContextMode::word);
  const BoundModel bound = bind(model, nullptr);
  AnnotatedWord word;
  word.analysis = {{Morpheme{"a", false}, "T1"}};
  const Tensor e =
      embed(bound, encode_word(word, model.vocab, EncodeMode::training));
  const int char_id = model.vocab.char_ids("a")[0];
  for (int j = 0; j < e.cols(); ++j) {
    CHECK(e.at(0, j) == model.embeddings.value->at(
                            static_cast<std::size_t>(char_id * e.cols() + j)));
  }
}

TEST_CASE("morpheme-level embedding: same id, same vector") {
  const TaggerModel model =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm, ContextMode::word);
  const BoundModel bound = bind(model, nullptr);
  AnnotatedWord word;
  word.analysis = {{Morpheme{"a", false}, "T1"},
                   {Morpheme{"b", false}, "T2"},
                   {Morpheme{"a", false}, "T1"}};
  const Tensor e =
      embed(bound, encode_word(word, model.vocab, EncodeMode::training));
  for (int j = 0; j < e.cols(); ++j) CHECK(e.at(0, j) == e.at(2, j));
}

TEST_CASE("boundary positions get the dedicated vector under char_sum") {
  const TaggerModel model = tiny_model(FeatureLevel::char_sum,
                                       ModelKind::bilstm,
                                       ContextMode::sentence);
  const BoundModel bound = bind(model, nullptr);
  const Corpus corpus = tiny_corpus();
  const auto seq =
      encode_sentence(corpus.sentences[0], model.vocab, EncodeMode::training);
  REQUIRE(seq.length() == 5);
  const Tensor e = embed(bound, seq);
  for (int j = 0; j < e.cols(); ++j) {
    CHECK(e.at(2, j) ==
          model.boundary_vec.value->at(static_cast<std::size_t>(j)));
  }
}

TEST_CASE("encode_states shapes and zero-weight closed form") {
  TaggerModel model =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm, ContextMode::word);
  // zero every weight: gates are sigmoid(0), candidate tanh(0) = 0, so all
  // hidden states collapse to zero regardless of position
  for (Parameter* p : model.parameters()) {
    std::fill(p->value->begin(), p->value->end(), 0.0);
  }
  const BoundModel bound = bind(model, nullptr);
  AnnotatedWord word;
  word.analysis = {{Morpheme{"a", false}, "T1"},
                   {Morpheme{"b", false}, "T2"},
                   {Morpheme{"c", false}, "T3"}};
  const auto seq = encode_word(word, model.vocab, EncodeMode::training);
  const Tensor states = encode_states(bound, embed(bound, seq), false, nullptr);
  CHECK(states.rows() == 3);
  CHECK(states.cols() == 2 * model.hidden_size);
  for (double v : states.values()) CHECK(v == 0.0);

  AnnotatedWord single;
  single.analysis = {{Morpheme{"a", false}, "T1"}};
  const Tensor one = encode_states(
      bound, embed(bound, encode_word(single, model.vocab,
                                      EncodeMode::training)),
      false, nullptr);
  CHECK(one.rows() == 1);
  CHECK(one.cols() == 2 * model.hidden_size);
}

TEST_CASE("reversing the input mirrors the two state streams") {
  const TaggerModel model =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm, ContextMode::word);
  const BoundModel bound = bind(model, nullptr);
  const int h = model.hidden_size;

  AnnotatedWord fwd, rev;
  fwd.analysis = {{Morpheme{"a", false}, "T1"},
                  {Morpheme{"b", false}, "T2"},
                  {Morpheme{"c", false}, "T3"}};
  rev.analysis = {fwd.analysis[2], fwd.analysis[1], fwd.analysis[0]};

  // run the reversed input through swapped direction weights: the forward
  // stream of the reversed run must mirror the backward stream of the
  // original run
  TaggerModel swapped = model;
  std::swap(swapped.fwd, swapped.bwd);
  const BoundModel bound_swapped = bind(swapped, nullptr);

  const Tensor a = encode_states(
      bound,
      embed(bound, encode_word(fwd, model.vocab, EncodeMode::training)),
      false, nullptr);
  const Tensor b = encode_states(
      bound_swapped,
      embed(bound_swapped, encode_word(rev, model.vocab, EncodeMode::training)),
      false, nullptr);

  const int len = 3;
  for (int l = 0; l < len; ++l) {
    for (int j = 0; j < h; ++j) {
      // forward state at l == backward state of the mirrored run at len-1-l
      CHECK(a.at(l, j) ==
            doctest::Approx(b.at(len - 1 - l, h + j)).epsilon(1e-12));
      CHECK(a.at(l, h + j) ==
            doctest::Approx(b.at(len - 1 - l, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("emission scores: zero projection yields the bias everywhere") {
  TaggerModel model =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm, ContextMode::word);
  std::fill(model.proj_weight.value->begin(), model.proj_weight.value->end(),
            0.0);
  (*model.proj_bias.value) = {0.5, -0.25, 1.5};
  const BoundModel bound = bind(model, nullptr);
  AnnotatedWord word;
  word.analysis = {{Morpheme{"a", false}, "T1"},
                   {Morpheme{"b", false}, "T2"}};
  const auto seq = encode_word(word, model.vocab, EncodeMode::training);
  const Tensor e = sequence_emissions(bound, seq, false, nullptr);
  CHECK(e.rows() == 2);
  CHECK(e.cols() == 3);
  for (int l = 0; l < 2; ++l) {
    CHECK(e.at(l, 0) == 0.5);
    CHECK(e.at(l, 1) == -0.25);
    CHECK(e.at(l, 2) == 1.5);
  }
  for (double v : e.values()) CHECK(std::isfinite(v));
}

TEST_CASE("softmax_decode argmax and tie-breaking") {
  const Tensor e(3, 3, {0.1, 0.9, 0.3,   //
                        0.5, 0.5, 0.1,   //
                        -1.0, -2.0, -0.5});
  const auto tags = softmax_decode(e, 3);
  CHECK(tags == std::vector<int>{1, 0, 2});

  // argmax is invariant to per-row constant shifts
  Tensor shifted(3, 3, e.values());
  for (int j = 0; j < 3; ++j) shifted.at(1, j) += 7.25;
  CHECK(softmax_decode(shifted, 3) == tags);
}

TEST_CASE("tag_word output length and determinism") {
  const TaggerModel model =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm, ContextMode::word);
  SegmentedWord word;
  word.raw_word = "ab";
  word.morphemes = {Morpheme{"a", false}, Morpheme{"b", false}};
  const AnnotatedWord first = tag_word(model, word);
  REQUIRE(first.analysis.size() == 2);
  CHECK(first.raw_word == "ab");
  CHECK(first.analysis[0].morpheme.text == "a");
  for (int i = 0; i < 3; ++i) CHECK(tag_word(model, word) == first);

  SegmentedWord single;
  single.raw_word = "a";
  single.morphemes = {Morpheme{"a", false}};
  CHECK(tag_word(model, single).analysis.size() == 1);

  SegmentedWord empty;
  CHECK_THROWS_AS(tag_word(model, empty), EmptyInput);
}

TEST_CASE("inference ignores dropout entirely") {
  TaggerModel model =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm, ContextMode::word);
  model.dropout_p = 0.5;  // train-time setting; tagging must not see it
  SegmentedWord word{"ab", {Morpheme{"a", false}, Morpheme{"b", false}}};
  const AnnotatedWord first = tag_word(model, word);
  for (int i = 0; i < 5; ++i) CHECK(tag_word(model, word) == first);
}

TEST_CASE("unknown morphemes still receive tags through UNK") {
  const TaggerModel model =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm, ContextMode::word);
  SegmentedWord word;
  word.raw_word = "zzz";
  word.morphemes = {Morpheme{"zzz", false}};
  const AnnotatedWord tagged = tag_word(model, word);
  REQUIRE(tagged.analysis.size() == 1);
  CHECK(model.vocab.tag_id(tagged.analysis[0].tag) >= 0);
}

TEST_CASE("word-mode tagging is independent of neighbouring words") {
  for (ModelKind kind : {ModelKind::bilstm, ModelKind::bilstm_crf}) {
    const TaggerModel model =
        tiny_model(FeatureLevel::morpheme, kind, ContextMode::word);
    SegmentedWord w1{"ab", {Morpheme{"a", false}, Morpheme{"b", false}}};
    SegmentedWord w2{"cd", {Morpheme{"c", false}, Morpheme{"d", false}}};
    const auto alone = tag_word(model, w1);
    const auto in_pair = tag_sentence(model, {w2, w1});
    CHECK(in_pair[1] == alone);
    const auto in_other = tag_sentence(model, {w1, w2});
    CHECK(in_other[0] == alone);
  }
}

TEST_CASE("sentence-mode output strips boundaries, lengths match input") {
  for (ModelKind kind : {ModelKind::bilstm, ModelKind::bilstm_crf}) {
    CAPTURE(to_string(kind));
    const TaggerModel model =
        tiny_model(FeatureLevel::morpheme, kind, ContextMode::sentence);
    SegmentedSentence sentence{
        {"ab", {Morpheme{"a", false}, Morpheme{"b", false}}},
        {"c", {Morpheme{"c", false}}},
        {"dba", {Morpheme{"d", false}, Morpheme{"b", false},
                 Morpheme{"a", false}}}};
    const auto tagged = tag_sentence(model, sentence);
    REQUIRE(tagged.size() == 3);
    CHECK(tagged[0].analysis.size() == 2);
    CHECK(tagged[1].analysis.size() == 1);
    CHECK(tagged[2].analysis.size() == 3);
    for (const auto& word : tagged) {
      for (const auto& tm : word.analysis) {
        CHECK(model.vocab.tag_id(tm.tag) >= 0);  // never the boundary column
      }
    }
  }
}

TEST_CASE("sentence CRF models add a boundary emission column") {
  const TaggerModel word_crf = tiny_model(
      FeatureLevel::morpheme, ModelKind::bilstm_crf, ContextMode::word);
  CHECK(word_crf.tag_dim() == word_crf.vocab.tag_count());
  CHECK_FALSE(word_crf.has_boundary_column());

  const TaggerModel sent_crf = tiny_model(
      FeatureLevel::morpheme, ModelKind::bilstm_crf, ContextMode::sentence);
  CHECK(sent_crf.tag_dim() == sent_crf.vocab.tag_count() + 1);
  CHECK(sent_crf.has_boundary_column());
  CHECK(sent_crf.crf.has_value());
  CHECK(sent_crf.crf->transitions.rows() == sent_crf.tag_dim());

  const TaggerModel sent_plain = tiny_model(
      FeatureLevel::morpheme, ModelKind::bilstm, ContextMode::sentence);
  CHECK(sent_plain.tag_dim() == sent_plain.vocab.tag_count());
}

TEST_CASE("predicted extra morph still yields one tag per morph") {
  const TaggerModel model =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm, ContextMode::word);
  // a spuriously over-segmented word: output length must track input length
  SegmentedWord noisy{"abx", {Morpheme{"a", false}, Morpheme{"b", false},
                              Morpheme{"x", false}}};
  CHECK(tag_word(model, noisy).analysis.size() == 3);
}

TEST_CASE("model initialisation is deterministic per seed") {
  const TaggerModel a =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm_crf,
                 ContextMode::sentence, 7);
  const TaggerModel b =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm_crf,
                 ContextMode::sentence, 7);
  const TaggerModel c =
      tiny_model(FeatureLevel::morpheme, ModelKind::bilstm_crf,
                 ContextMode::sentence, 8);
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  const auto pc = c.parameters();
  REQUIRE(pa.size() == pb.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(*pa[i]->value == *pb[i]->value);
    any_diff |= (*pa[i]->value != *pc[i]->value);
  }
  CHECK(any_diff);

  // forget-gate bias block is 1.0, the rest 0
  const int h = a.hidden_size;
  for (int j = 0; j < 4 * h; ++j) {
    const double expect = (j >= h && j < 2 * h) ? 1.0 : 0.0;
    CHECK(a.fwd.bias.value->at(static_cast<std::size_t>(j)) == expect);
  }
}
