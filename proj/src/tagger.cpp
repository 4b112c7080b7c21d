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

#include "morphtag/tagger.hpp"

#include <cmath>

namespace morphtag {

namespace {

// Score low enough to exclude a tag from a Viterbi path while staying
// finite under addition.
constexpr double kMaskScore = -1e30;

void init_uniform(Parameter& p, double bound, std::mt19937_64& rng) {
  for (double& x : *p.value) x = rand_uniform(rng, bound);
}

}  // namespace

std::string to_string(FeatureLevel level) {
  return level == FeatureLevel::morpheme ? "morpheme" : "char_sum";
}

FeatureLevel feature_level_from_string(const std::string& s) {
  if (s == "morpheme") return FeatureLevel::morpheme;
  if (s == "char_sum") return FeatureLevel::char_sum;
  throw ConfigError("unknown feature level: '" + s +
                    "' (expected 'morpheme' or 'char_sum')");
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::bilstm ? "bilstm" : "bilstm_crf";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "bilstm") return ModelKind::bilstm;
  if (s == "bilstm_crf") return ModelKind::bilstm_crf;
  throw ConfigError("unknown model kind: '" + s +
                    "' (expected 'bilstm' or 'bilstm_crf')");
}

std::vector<Parameter*> TaggerModel::parameters() {
  std::vector<Parameter*> out{&embeddings};
  if (features.level == FeatureLevel::char_sum) out.push_back(&boundary_vec);
  out.insert(out.end(), {&fwd.w_input, &fwd.w_recurrent, &fwd.bias,
                         &bwd.w_input, &bwd.w_recurrent, &bwd.bias,
                         &proj_weight, &proj_bias});
  if (crf) {
    out.insert(out.end(), {&crf->transitions, &crf->start, &crf->end});
  }
  return out;
}

std::vector<const Parameter*> TaggerModel::parameters() const {
  auto mutable_params = const_cast<TaggerModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

TaggerModel init_model(Vocabulary vocab, const FeatureConfig& features,
                       ModelKind kind, ContextMode context, int hidden_size,
                       double dropout_p, std::uint64_t seed,
                       SegmentationKind segmentation, std::string language_id) {
  if (hidden_size <= 0) throw ConfigError("hidden_size must be positive");
  if (features.embedding_dim <= 0) {
    throw ConfigError("embedding_dim must be positive");
  }
  if (vocab.tag_count() == 0) throw ConfigError("vocabulary has no tags");

  TaggerModel model;
  model.vocab = std::move(vocab);
  model.features = features;
  model.kind = kind;
  model.context = context;
  model.segmentation = segmentation;
  model.language_id = std::move(language_id);
  model.hidden_size = hidden_size;
  model.dropout_p = dropout_p;

  const int d = features.embedding_dim;
  const int h = hidden_size;
  const int t = model.tag_dim();
  const int table_rows = features.level == FeatureLevel::morpheme
                             ? model.vocab.morpheme_table_size()
                             : model.vocab.char_table_size();

  std::mt19937_64 rng(seed);
  const double emb_bound = std::sqrt(1.0 / d);
  const double lstm_bound = std::sqrt(1.0 / h);
  const double proj_bound = std::sqrt(1.0 / (2.0 * h));

  model.embeddings = Parameter::make("embeddings", table_rows, d);
  init_uniform(model.embeddings, emb_bound, rng);
  if (features.level == FeatureLevel::char_sum) {
    model.boundary_vec = Parameter::make("boundary_vec", 1, d);
    init_uniform(model.boundary_vec, emb_bound, rng);
  }

  for (auto [weights, prefix] :
       {std::pair{&model.fwd, "lstm_fwd"}, std::pair{&model.bwd, "lstm_bwd"}}) {
    weights->w_input = Parameter::make(std::string(prefix) + ".w_input", d, 4 * h);
    weights->w_recurrent =
        Parameter::make(std::string(prefix) + ".w_recurrent", h, 4 * h);
    weights->bias = Parameter::make(std::string(prefix) + ".bias", 1, 4 * h);
    init_uniform(weights->w_input, lstm_bound, rng);
    init_uniform(weights->w_recurrent, lstm_bound, rng);
    // forget-gate bias 1.0, the conventional stabiliser
    for (int j = h; j < 2 * h; ++j) (*weights->bias.value)[j] = 1.0;
  }

  model.proj_weight = Parameter::make("proj.weight", 2 * h, t);
  model.proj_bias = Parameter::make("proj.bias", 1, t);
  init_uniform(model.proj_weight, proj_bound, rng);

  if (kind == ModelKind::bilstm_crf) {
    CrfLayer crf;
    crf.transitions = Parameter::make("crf.transitions", t, t);
    crf.start = Parameter::make("crf.start", 1, t);
    crf.end = Parameter::make("crf.end", 1, t);
    model.crf = std::move(crf);
  }
  return model;
}

BoundModel bind(const TaggerModel& model, Tape* tape) {
  auto view = [tape](const Parameter& p) {
    return tape ? tape->leaf(p) : Tensor::wrap(p.rows(), p.cols(), p.value);
  };
  BoundModel b;
  b.model = &model;
  b.embeddings = view(model.embeddings);
  if (model.features.level == FeatureLevel::char_sum) {
    b.boundary_vec = view(model.boundary_vec);
  }
  b.fwd_wi = view(model.fwd.w_input);
  b.fwd_wr = view(model.fwd.w_recurrent);
  b.fwd_b = view(model.fwd.bias);
  b.bwd_wi = view(model.bwd.w_input);
  b.bwd_wr = view(model.bwd.w_recurrent);
  b.bwd_b = view(model.bwd.bias);
  b.proj_w = view(model.proj_weight);
  b.proj_b = view(model.proj_bias);
  if (model.crf) {
    b.crf_trans = view(model.crf->transitions);
    b.crf_start = view(model.crf->start);
    b.crf_end = view(model.crf->end);
  }
  return b;
}

Tensor embed(const BoundModel& bound, const EncodedSequence& seq) {
  if (seq.length() == 0) throw EmptyInput("cannot embed an empty sequence");
  const TaggerModel& model = *bound.model;
  if (model.features.level == FeatureLevel::morpheme) {
    return gather(bound.embeddings, seq.morpheme_ids);
  }
  std::vector<Tensor> rows;
  rows.reserve(seq.char_ids.size());
  for (int l = 0; l < seq.length(); ++l) {
    if (seq.morpheme_ids[l] == model.vocab.word_boundary_id()) {
      rows.push_back(bound.boundary_vec);
    } else {
      rows.push_back(sum_axis(gather(bound.embeddings, seq.char_ids[l]), 0));
    }
  }
  return stack_rows(rows);
}

namespace {

// One LSTM direction over the embedded sequence; `order` lists time steps.
std::vector<Tensor> lstm_pass(const Tensor& embedded, const Tensor& w_input,
                              const Tensor& w_recurrent, const Tensor& bias,
                              const std::vector<int>& order, int hidden) {
  std::vector<Tensor> states(order.size());
  Tensor h_prev(1, hidden);
  Tensor c_prev(1, hidden);
  for (std::size_t step = 0; step < order.size(); ++step) {
    const Tensor x = row(embedded, order[step]);
    const Tensor gates =
        add(add(matmul(x, w_input), matmul(h_prev, w_recurrent)), bias);
    const Tensor i = sigmoid(slice_cols(gates, 0, hidden));
    const Tensor f = sigmoid(slice_cols(gates, hidden, hidden));
    const Tensor g = tanh(slice_cols(gates, 2 * hidden, hidden));
    const Tensor o = sigmoid(slice_cols(gates, 3 * hidden, hidden));
    const Tensor c = add(mul(f, c_prev), mul(i, g));
    const Tensor h = mul(o, tanh(c));
    states[static_cast<std::size_t>(order[step])] = h;
    h_prev = h;
    c_prev = c;
  }
  return states;
}

}  // namespace

Tensor encode_states(const BoundModel& bound, const Tensor& embedded,
                     bool train, std::mt19937_64* rng) {
  const TaggerModel& model = *bound.model;
  const int len = embedded.rows();
  Tensor inputs = embedded;
  if (train && model.dropout_p > 0.0) {
    inputs = dropout(inputs, model.dropout_p, *rng);
  }
  std::vector<int> forward_order(static_cast<std::size_t>(len));
  std::vector<int> backward_order(static_cast<std::size_t>(len));
  for (int l = 0; l < len; ++l) {
    forward_order[static_cast<std::size_t>(l)] = l;
    backward_order[static_cast<std::size_t>(l)] = len - 1 - l;
  }
  const auto fwd_states = lstm_pass(inputs, bound.fwd_wi, bound.fwd_wr,
                                    bound.fwd_b, forward_order,
                                    model.hidden_size);
  const auto bwd_states = lstm_pass(inputs, bound.bwd_wi, bound.bwd_wr,
                                    bound.bwd_b, backward_order,
                                    model.hidden_size);
  std::vector<Tensor> rows;
  rows.reserve(static_cast<std::size_t>(len));
  for (int l = 0; l < len; ++l) {
    rows.push_back(concat_cols(fwd_states[static_cast<std::size_t>(l)],
                               bwd_states[static_cast<std::size_t>(l)]));
  }
  Tensor states = stack_rows(rows);
  if (train && model.dropout_p > 0.0) {
    states = dropout(states, model.dropout_p, *rng);
  }
  return states;
}

Tensor emission_scores(const BoundModel& bound, const Tensor& states) {
  return add_rowvec(matmul(states, bound.proj_w), bound.proj_b);
}

Tensor sequence_emissions(const BoundModel& bound, const EncodedSequence& seq,
                          bool train, std::mt19937_64* rng) {
  return emission_scores(bound, encode_states(bound, embed(bound, seq), train, rng));
}

std::vector<int> softmax_decode(const Tensor& emissions, int n_tags) {
  if (n_tags <= 0 || n_tags > emissions.cols()) {
    throw ShapeMismatch("softmax_decode: n_tags " + std::to_string(n_tags) +
                        " vs emissions " + emissions.shape_str());
  }
  std::vector<int> out(static_cast<std::size_t>(emissions.rows()));
  for (int l = 0; l < emissions.rows(); ++l) {
    int arg = 0;
    double best = emissions.at(l, 0);
    for (int j = 1; j < n_tags; ++j) {
      if (emissions.at(l, j) > best) {
        best = emissions.at(l, j);
        arg = j;
      }
    }
    out[static_cast<std::size_t>(l)] = arg;
  }
  return out;
}

std::vector<int> predict_tag_ids(const TaggerModel& model,
                                 const EncodedSequence& seq) {
  if (seq.length() == 0) throw EmptyInput("empty sequence");
  const BoundModel bound = bind(model, nullptr);
  const Tensor emissions = sequence_emissions(bound, seq, false, nullptr);
  const int n_tags = model.vocab.tag_count();

  std::vector<int> decoded;
  if (model.kind == ModelKind::bilstm) {
    decoded = softmax_decode(emissions, n_tags);
  } else {
    Tensor constrained = emissions;
    if (model.has_boundary_column()) {
      // Real positions never take the boundary pseudo-tag and boundary
      // positions always do; transitions still flow through the chain.
      constrained = Tensor(emissions.rows(), emissions.cols(),
                           emissions.values());
      const int boundary_col = model.boundary_tag_id();
      for (int l = 0; l < constrained.rows(); ++l) {
        if (seq.word_index[static_cast<std::size_t>(l)] < 0) {
          for (int j = 0; j < n_tags; ++j) constrained.at(l, j) = kMaskScore;
        } else {
          constrained.at(l, boundary_col) = kMaskScore;
        }
      }
    }
    const Tensor trans =
        Tensor::wrap(model.crf->transitions.rows(), model.crf->transitions.cols(),
                     model.crf->transitions.value);
    const Tensor start = Tensor::wrap(1, model.crf->start.cols(),
                                      model.crf->start.value);
    const Tensor end = Tensor::wrap(1, model.crf->end.cols(),
                                    model.crf->end.value);
    decoded = viterbi_decode(constrained, trans, start, end).tags;
  }

  for (int l = 0; l < seq.length(); ++l) {
    if (seq.word_index[static_cast<std::size_t>(l)] < 0) {
      decoded[static_cast<std::size_t>(l)] = -1;
    }
  }
  return decoded;
}

namespace {

AnnotatedWord annotate(const SegmentedWord& word,
                       const std::vector<std::string>& tags) {
  AnnotatedWord out;
  out.raw_word = word.raw_word;
  out.analysis.reserve(word.morphemes.size());
  for (std::size_t i = 0; i < word.morphemes.size(); ++i) {
    out.analysis.push_back({word.morphemes[i], tags[i]});
  }
  return out;
}

}  // namespace

AnnotatedWord tag_word(const TaggerModel& model, const SegmentedWord& word) {
  if (word.morphemes.empty()) throw EmptyInput("word has no morphemes");
  const EncodedSequence seq = encode_segmented_word(word, model.vocab);
  const std::vector<int> ids = predict_tag_ids(model, seq);
  std::vector<std::string> tags;
  tags.reserve(ids.size());
  for (int id : ids) tags.push_back(model.vocab.tag_name(id));
  return annotate(word, tags);
}

std::vector<AnnotatedWord> tag_sentence(const TaggerModel& model,
                                        const SegmentedSentence& sentence) {
  if (sentence.empty()) throw EmptyInput("sentence has no words");
  std::vector<AnnotatedWord> out;
  out.reserve(sentence.size());
  if (model.context == ContextMode::word) {
    for (const auto& word : sentence) out.push_back(tag_word(model, word));
    return out;
  }
  for (const auto& word : sentence) {
    if (word.morphemes.empty()) throw EmptyInput("word has no morphemes");
  }
  const EncodedSequence seq = encode_segmented_sentence(sentence, model.vocab);
  const std::vector<int> ids = predict_tag_ids(model, seq);
  std::size_t pos = 0;
  for (const auto& word : sentence) {
    std::vector<std::string> tags;
    tags.reserve(word.morphemes.size());
    for (std::size_t i = 0; i < word.morphemes.size(); ++i, ++pos) {
      while (pos < ids.size() && seq.word_index[pos] < 0) ++pos;  // boundary
      tags.push_back(model.vocab.tag_name(ids[pos]));
    }
    out.push_back(annotate(word, tags));
  }
  return out;
}

Corpus tag_corpus(const TaggerModel& model,
                  const std::vector<SegmentedSentence>& sentences) {
  Corpus out;
  out.kind = model.segmentation;
  out.language_id = model.language_id;
  for (const auto& sentence : sentences) {
    if (sentence.empty()) continue;
    out.sentences.push_back(Sentence{tag_sentence(model, sentence)});
  }
  return out;
}

}  // namespace morphtag
