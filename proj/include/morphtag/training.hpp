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

#ifndef MORPHTAG_TRAINING_HPP_
#define MORPHTAG_TRAINING_HPP_

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morphtag/config_file.hpp"
#include "morphtag/evaluation.hpp"
#include "morphtag/tagger.hpp"

namespace morphtag {

// Full training configuration. Free values are allowed everywhere except
// under grid-constrained validation, which pins each dimension to its
// search range.
struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 0.0;
  int hidden_size = 128;
  double dropout = 0.0;
  double clip_norm = std::numeric_limits<double>::infinity();
  int max_epochs = 100;
  int patience = 10;
  int batch_size = 32;
  std::uint64_t seed = 1;
  ModelKind model_kind = ModelKind::bilstm;
  ContextMode context = ContextMode::word;
  FeatureLevel feature_level = FeatureLevel::morpheme;
  bool lowercase = false;
  int embedding_dim = 128;
  int min_count = 2;

  FeatureConfig feature_config() const {
    return FeatureConfig{feature_level, lowercase, embedding_dim};
  }

  // Basic sanity always; the full search-range checks when
  // grid_constrained.
  void validate(bool grid_constrained) const;

  // Canonical key=value echo (sorted keys) and its FNV-1a hash, used to
  // name and resume grid trials.
  std::map<std::string, std::string> to_map() const;
  std::string canonical_text() const;
  std::string hash() const;

  // Applies `key = value` settings on top of this config. Unknown keys and
  // unparsable values are ConfigErrors naming the offender.
  void apply(const std::string& key, const std::string& value,
             const std::string& source);
  static TrainConfig from_values(const ConfigValues& values,
                                 const std::string& source);

  // Keys that a config file must provide explicitly.
  static const std::vector<std::string>& required_keys();
};

// Cross product of the grid axes over a default config; the first axis
// varies slowest. Configuration order is the tie-break order of ranking.
std::vector<TrainConfig> expand_grid(const GridAxes& axes,
                                     const std::string& source);

struct EpochStats {
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;
  double val_micro_f1 = 0.0;
};

struct TrialResult {
  TrainConfig config;
  std::string config_hash;
  std::string status = "ok";
  std::string error;
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_val_macro_f1 = 0.0;
  double best_val_micro_f1 = 0.0;
  double wall_seconds = 0.0;
  std::optional<EvalReport> test_report;

  std::string to_json_string() const;
  static TrialResult from_json_string(const std::string& text,
                                      const std::string& source);
};

// Mean of per-position cross-entropy (bilstm) or per-sequence CRF negative
// log-likelihood (bilstm_crf) over a batch. Boundary positions are always
// excluded from supervision. `denom` reports the normalisation count.
Tensor batch_loss(const BoundModel& bound,
                  const std::vector<const EncodedSequence*>& batch, bool train,
                  std::mt19937_64* rng, int* denom = nullptr);

struct ValidationScore {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
};

// Tags the corpus with the model and scores against its gold tags; the
// macro universe is the union of gold and predicted tags.
ValidationScore validation_scores(const TaggerModel& model,
                                  const Corpus& corpus);

EvalReport evaluate_model(const TaggerModel& model, const Corpus& test);

struct TrainOutcome {
  TaggerModel model;
  TrialResult result;
};

// One full training run: shuffled epochs, per-epoch validation macro F1,
// snapshot of the best epoch, early stop after `patience` epochs without
// improvement. With an empty validation corpus (the retrain-on-full-data
// protocol) it runs exactly max_epochs and keeps the final parameters.
TrainOutcome train(const TrainConfig& config, const Corpus& train_corpus,
                   const Corpus& valid_corpus);

struct GridOptions {
  std::string out_dir;  // empty: no persistence
  int jobs = 1;
  bool grid_constrained = true;
};

// Trains every configuration (resuming finished trials from out_dir by
// config hash). Failures become status="failed" entries without aborting
// the sweep. Returns results ranked by validation macro F1 descending,
// ties by micro F1 then configuration order.
std::vector<TrialResult> grid_search(const std::vector<TrainConfig>& configs,
                                     const Corpus& train_corpus,
                                     const Corpus& valid_corpus,
                                     const GridOptions& options);

struct SeedRun {
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string error;
  TrialResult trial;
  std::optional<EvalReport> report;
  std::optional<TaggerModel> model;
};

struct SeedsSummary {
  std::vector<SeedRun> runs;
  bool ok = false;
  double mean_macro_f1 = 0.0;
  double std_macro_f1 = 0.0;
  double mean_micro_f1 = 0.0;
  double std_micro_f1 = 0.0;

  std::string to_json_string() const;
};

// Retrains the frozen config once per seed on the full training set and
// evaluates on the test set; reports mean and sample standard deviation of
// macro/micro F1. A failed seed marks the whole aggregate as failed while
// keeping the per-seed results that did finish.
SeedsSummary run_seeds(const TrainConfig& config, const Corpus& train_full,
                       const Corpus& test,
                       const std::vector<std::uint64_t>& seeds);

}  // namespace morphtag

#endif  // MORPHTAG_TRAINING_HPP_
