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

#ifndef MORPHTAG_TAGGER_HPP_
#define MORPHTAG_TAGGER_HPP_

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "morphtag/crf.hpp"
#include "morphtag/tensor.hpp"
#include "morphtag/vocab.hpp"

namespace morphtag {

enum class FeatureLevel { morpheme, char_sum };
enum class ModelKind { bilstm, bilstm_crf };

std::string to_string(FeatureLevel level);
FeatureLevel feature_level_from_string(const std::string& s);
std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// Input feature choices: one embedding row per morpheme, or the sum of
// character embedding rows. Lowercase folds morpheme text before lookup
// (meant for surface corpora; recorded as configured either way).
struct FeatureConfig {
  FeatureLevel level = FeatureLevel::morpheme;
  bool lowercase = false;
  int embedding_dim = 128;
};

struct LstmWeights {
  Parameter w_input;      // input_dim x 4h, gate blocks [i | f | g | o]
  Parameter w_recurrent;  // h x 4h
  Parameter bias;         // 1 x 4h
};

// Explicit start/end score vectors keep the transition matrix over real
// tags only. transitions(i, j) scores tag j following tag i.
struct CrfLayer {
  Parameter transitions;
  Parameter start;
  Parameter end;
};

// A bi-LSTM tagger, optionally with a linear-chain CRF output layer.
// Sentence-mode CRF models score an extra "boundary" emission column for
// the word-separator positions; it is stripped from all output.
struct TaggerModel {
  Vocabulary vocab;
  FeatureConfig features;
  ModelKind kind = ModelKind::bilstm;
  ContextMode context = ContextMode::word;
  SegmentationKind segmentation = SegmentationKind::canonical;
  std::string language_id;
  int hidden_size = 128;
  double dropout_p = 0.0;

  Parameter embeddings;    // morpheme table or character table
  Parameter boundary_vec;  // 1 x d boundary input vector (char_sum only)
  LstmWeights fwd;
  LstmWeights bwd;
  Parameter proj_weight;  // 2h x tag_dim
  Parameter proj_bias;    // 1 x tag_dim
  std::optional<CrfLayer> crf;

  bool has_boundary_column() const {
    return kind == ModelKind::bilstm_crf && context == ContextMode::sentence;
  }
  // Width of the emission matrix: |tags| plus the boundary column if any.
  int tag_dim() const {
    return vocab.tag_count() + (has_boundary_column() ? 1 : 0);
  }
  int boundary_tag_id() const { return vocab.tag_count(); }

  // All trainable parameters in a fixed order (checkpoint + optimizer order).
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
};

// Builds a freshly initialised model. LSTM weights are uniform in
// +-sqrt(1/hidden), biases zero except the forget gate block at 1.0; the
// projection is uniform in +-sqrt(1/2h); CRF scores start at zero.
TaggerModel init_model(Vocabulary vocab, const FeatureConfig& features,
                       ModelKind kind, ContextMode context, int hidden_size,
                       double dropout_p, std::uint64_t seed,
                       SegmentationKind segmentation = SegmentationKind::canonical,
                       std::string language_id = "");

// Per-pass view of the parameters, on a tape (training) or as constants
// (inference).
struct BoundModel {
  const TaggerModel* model = nullptr;
  Tensor embeddings, boundary_vec;
  Tensor fwd_wi, fwd_wr, fwd_b;
  Tensor bwd_wi, bwd_wr, bwd_b;
  Tensor proj_w, proj_b;
  Tensor crf_trans, crf_start, crf_end;
};

BoundModel bind(const TaggerModel& model, Tape* tape);

// Input embeddings for one encoded sequence (L x d). Under char_sum
// features each morpheme embeds as the sum of its character rows; boundary
// positions use a dedicated learned vector.
Tensor embed(const BoundModel& bound, const EncodedSequence& seq);

// Bi-LSTM encoding (L x 2h): a left-to-right and a right-to-left pass over
// the same embeddings, concatenated per position. Initial states are zero.
// In train mode dropout is applied to the embeddings and to the
// concatenated states.
Tensor encode_states(const BoundModel& bound, const Tensor& embedded,
                     bool train, std::mt19937_64* rng);

// Linear projection to tag scores (L x tag_dim).
Tensor emission_scores(const BoundModel& bound, const Tensor& states);

// embed -> encode_states -> emission_scores.
Tensor sequence_emissions(const BoundModel& bound, const EncodedSequence& seq,
                          bool train, std::mt19937_64* rng);

// Per-position argmax over the first `n_tags` columns; ties break toward
// the lowest tag id.
std::vector<int> softmax_decode(const Tensor& emissions, int n_tags);

// Predicted tag id per position of an encoded sequence (dropout disabled).
// Boundary positions yield -1. CRF models decode with Viterbi, constrained
// so that the boundary pseudo-tag appears exactly at boundary positions.
std::vector<int> predict_tag_ids(const TaggerModel& model,
                                 const EncodedSequence& seq);

// Tags a pre-segmented word. Morpheme text passes through unchanged; the
// output analysis has exactly one tag per input morpheme.
AnnotatedWord tag_word(const TaggerModel& model, const SegmentedWord& word);

// Tags a pre-segmented sentence. Word-context models tag each word in
// isolation; sentence-context models run one sequence with boundary
// positions stripped from the output.
std::vector<AnnotatedWord> tag_sentence(const TaggerModel& model,
                                        const SegmentedSentence& sentence);

// Tags a whole segmented corpus, sentence by sentence.
Corpus tag_corpus(const TaggerModel& model,
                  const std::vector<SegmentedSentence>& sentences);

}  // namespace morphtag

#endif  // MORPHTAG_TAGGER_HPP_
