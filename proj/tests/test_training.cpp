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
#include <filesystem>
#include <set>

#include "morphtag/training.hpp"
#include "test_util.hpp"

using namespace morphtag;
using morphtag::testing::deterministic_corpus;

namespace {

TrainConfig fast_config() {
  TrainConfig config;
  config.lr = 0.02;
  config.hidden_size = 24;
  config.embedding_dim = 24;
  config.batch_size = 16;
  config.max_epochs = 50;
  config.patience = 50;
  config.min_count = 1;
  config.seed = 3;
  return config;
}

Corpus two_word_corpus() {
  return parse_corpus_text("ab\ta[T1]-b[T2]\ncd\tc[T3]-d[T1]\n",
                           SegmentationKind::canonical, "mem");
}

}  // namespace

TEST_CASE("bilstm loss equals ln T under uniform emissions") {
  const Corpus corpus = two_word_corpus();
  const Vocabulary vocab = build_vocabulary(corpus, 1, false);
  TaggerModel model =
      init_model(vocab, FeatureConfig{FeatureLevel::morpheme, false, 8},
                 ModelKind::bilstm, ContextMode::word, 6, 0.0, 1);
  // zero projection makes every emission row identical (the bias, zero)
  std::fill(model.proj_weight.value->begin(), model.proj_weight.value->end(),
            0.0);
  const auto seqs =
      encode_corpus(corpus, vocab, ContextMode::word, EncodeMode::training);
  std::vector<const EncodedSequence*> batch;
  for (const auto& s : seqs) batch.push_back(&s);
  const BoundModel bound = bind(model, nullptr);
  int denom = 0;
  const Tensor loss = batch_loss(bound, batch, false, nullptr, &denom);
  CHECK(denom == 4);
  CHECK(loss.item() == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("bilstm loss vanishes for confident correct emissions") {
  // single tag in the batch; a large bias margin drives the loss to zero
  const Corpus corpus =
      parse_corpus_text("aa\ta[T1]-a[T1]\n", SegmentationKind::canonical,
                        "mem");
  const Vocabulary vocab = build_vocabulary(corpus, 1, false);
  REQUIRE(vocab.tag_count() == 1);
  TaggerModel model =
      init_model(vocab, FeatureConfig{FeatureLevel::morpheme, false, 8},
                 ModelKind::bilstm, ContextMode::word, 6, 0.0, 1);
  const auto seqs =
      encode_corpus(corpus, vocab, ContextMode::word, EncodeMode::training);
  const BoundModel bound = bind(model, nullptr);
  const Tensor loss = batch_loss(bound, {&seqs[0]}, false, nullptr);
  CHECK(loss.item() == 0.0);  // log softmax over one class
}

TEST_CASE("crf loss is zero for a single-tag tag set") {
  const Corpus corpus =
      parse_corpus_text("aa\ta[T1]-a[T1]\nb\tb[T1]\n",
                        SegmentationKind::canonical, "mem");
  const Vocabulary vocab = build_vocabulary(corpus, 1, false);
  TaggerModel model =
      init_model(vocab, FeatureConfig{FeatureLevel::morpheme, false, 8},
                 ModelKind::bilstm_crf, ContextMode::word, 6, 0.0, 1);
  const auto seqs =
      encode_corpus(corpus, vocab, ContextMode::word, EncodeMode::training);
  std::vector<const EncodedSequence*> batch;
  for (const auto& s : seqs) batch.push_back(&s);
  const BoundModel bound = bind(model, nullptr);
  const Tensor loss = batch_loss(bound, batch, false, nullptr);
  CHECK(std::abs(loss.item()) < 1e-12);
}

TEST_CASE("batch gradients match finite differences for both loss kinds") {
  const Corpus corpus = parse_corpus_text(
      "ab\ta[T1]-b[T2]\ncd\tc[T3]-d[T1]\n\nba\tb[T2]-a[T1]\n",
      SegmentationKind::canonical, "mem");
  const Vocabulary vocab = build_vocabulary(corpus, 1, false);

  for (ModelKind kind : {ModelKind::bilstm, ModelKind::bilstm_crf}) {
    for (ContextMode context : {ContextMode::word, ContextMode::sentence}) {
      CAPTURE(to_string(kind));
      CAPTURE(to_string(context));
      TaggerModel model =
          init_model(vocab, FeatureConfig{FeatureLevel::char_sum, false, 5},
                     kind, context, 4, 0.0, 77);
      const auto seqs =
          encode_corpus(corpus, vocab, context, EncodeMode::training);
      std::vector<const EncodedSequence*> batch;
      for (const auto& s : seqs) batch.push_back(&s);

      auto loss_value = [&]() {
        return batch_loss(bind(model, nullptr), batch, false, nullptr).item();
      };
      Tape tape;
      const BoundModel bound = bind(model, &tape);
      const Tensor loss = batch_loss(bound, batch, false, nullptr);
      tape.backward(loss);

      const auto params = model.parameters();
      // leaves were created by bind in parameter order
      std::vector<std::vector<double>> grads;
      std::vector<Tensor> leaves{bound.embeddings, bound.boundary_vec,
                                 bound.fwd_wi, bound.fwd_wr, bound.fwd_b,
                                 bound.bwd_wi, bound.bwd_wr, bound.bwd_b,
                                 bound.proj_w, bound.proj_b};
      if (model.crf) {
        leaves.insert(leaves.end(),
                      {bound.crf_trans, bound.crf_start, bound.crf_end});
      }
      REQUIRE(leaves.size() == params.size());
      for (const auto& leaf : leaves) grads.push_back(tape.grad(leaf));

      const auto report =
          morphtag::testing::finite_difference_check(params, grads, loss_value);
      CAPTURE(report.worst_param);
      CHECK(report.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("training fits the deterministic synthetic corpus") {
  const Corpus corpus = deterministic_corpus(200, 18, 10, 5);
  TrainConfig config = fast_config();
  config.model_kind = ModelKind::bilstm;
  config.context = ContextMode::word;

  const auto outcome = train(config, corpus, Corpus{{}, "syn", corpus.kind});
  const ValidationScore train_fit = validation_scores(outcome.model, corpus);
  CHECK(train_fit.micro_f1 >= 0.99);
  CHECK(static_cast<int>(outcome.result.epochs.size()) <= 50);

  // training loss is non-increasing once smoothed, after warmup
  const auto& epochs = outcome.result.epochs;
  auto window = [&](std::size_t i) {
    return (epochs[i].train_loss + epochs[i + 1].train_loss +
            epochs[i + 2].train_loss) / 3.0;
  };
  for (std::size_t i = 5; i + 3 < epochs.size(); ++i) {
    CHECK(window(i + 1) <= window(i) + 1e-9);
  }
}

TEST_CASE("patience zero stops after exactly one epoch") {
  const Corpus corpus = deterministic_corpus(40, 10, 5, 2);
  const auto [train_part, valid_part] = split_validation(corpus, 0.25, 1);
  TrainConfig config = fast_config();
  config.patience = 0;
  config.max_epochs = 30;
  const auto outcome = train(config, train_part, valid_part);
  CHECK(outcome.result.epochs.size() == 1);
  CHECK(outcome.result.best_epoch == 1);
}

TEST_CASE("same seed twice gives identical trials and parameters") {
  const Corpus corpus = deterministic_corpus(60, 12, 6, 9);
  const auto [train_part, valid_part] = split_validation(corpus, 0.2, 4);
  TrainConfig config = fast_config();
  config.max_epochs = 6;
  config.dropout = 0.2;  // exercises the rng path too

  const auto a = train(config, train_part, valid_part);
  const auto b = train(config, train_part, valid_part);
  REQUIRE(a.result.epochs.size() == b.result.epochs.size());
  for (std::size_t i = 0; i < a.result.epochs.size(); ++i) {
    CHECK(a.result.epochs[i].train_loss == b.result.epochs[i].train_loss);
    CHECK(a.result.epochs[i].val_macro_f1 == b.result.epochs[i].val_macro_f1);
  }
  const auto pa = a.model.parameters();
  const auto pb = b.model.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(*pa[i]->value == *pb[i]->value);  // bit-identical
  }
}

TEST_CASE("early stopping restores the best validation epoch") {
  const Corpus corpus = deterministic_corpus(80, 14, 7, 11);
  const auto [train_part, valid_part] = split_validation(corpus, 0.2, 8);
  TrainConfig config = fast_config();
  config.max_epochs = 12;
  config.patience = 12;
  const auto outcome = train(config, train_part, valid_part);

  double best = -1.0;
  int best_epoch = 0;
  for (std::size_t i = 0; i < outcome.result.epochs.size(); ++i) {
    if (outcome.result.epochs[i].val_macro_f1 > best) {
      best = outcome.result.epochs[i].val_macro_f1;
      best_epoch = static_cast<int>(i) + 1;
    }
  }
  CHECK(outcome.result.best_epoch == best_epoch);
  CHECK(outcome.result.best_val_macro_f1 == best);
  // the returned parameters really are the snapshot of that epoch
  const ValidationScore restored =
      validation_scores(outcome.model, valid_part);
  CHECK(restored.macro_f1 == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("config validation and grid constraints") {
  TrainConfig config;
  config.model_kind = ModelKind::bilstm;
  CHECK_NOTHROW(config.validate(false));
  config.lr = 0.5;  // fine free, outside the grid range
  CHECK_NOTHROW(config.validate(false));
  CHECK_THROWS_AS(config.validate(true), ConfigError);
  config.lr = 0.01;
  config.hidden_size = 100;  // not a power of two in 64..2048
  CHECK_THROWS_AS(config.validate(true), ConfigError);
  config.hidden_size = 128;
  config.dropout = 0.15;
  CHECK_THROWS_AS(config.validate(true), ConfigError);
  config.dropout = 0.2;
  config.clip_norm = 3.0;
  CHECK_THROWS_AS(config.validate(true), ConfigError);
  config.clip_norm = std::numeric_limits<double>::infinity();
  CHECK_NOTHROW(config.validate(true));
  config.dropout = 1.0;
  CHECK_THROWS_AS(config.validate(false), ConfigError);
}

TEST_CASE("config parsing, canonical text and hashing") {
  const ConfigValues values = parse_config_text(
      "# comment\n"
      "model_kind = bilstm_crf\n"
      "context = sentence\n"
      "feature_level = char_sum\n"
      "lr = 0.01\n"
      "hidden_size = 64\n"
      "clip_norm = inf\n"
      "lowercase = true\n",
      "mem");
  const TrainConfig config = TrainConfig::from_values(values, "mem");
  CHECK(config.model_kind == ModelKind::bilstm_crf);
  CHECK(config.context == ContextMode::sentence);
  CHECK(config.feature_level == FeatureLevel::char_sum);
  CHECK(config.lowercase);
  CHECK(std::isinf(config.clip_norm));
  CHECK(config.batch_size == 32);  // default preserved

  CHECK(config.hash() == config.hash());
  TrainConfig other = config;
  other.seed = config.seed + 1;
  CHECK(other.hash() != config.hash());

  // unknown and missing keys are named in errors
  CHECK_THROWS_WITH_AS(
      TrainConfig::from_values({{"learning_rate", "0.1"}}, "mem"),
      doctest::Contains("learning_rate"), ConfigError);
  try {
    TrainConfig::from_values({{"model_kind", "bilstm"}}, "mem");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("missing required config key") !=
          std::string::npos);
  }
}

TEST_CASE("grid expansion is an ordered cross product") {
  const GridAxes axes = parse_grid_text(
      "model_kind = bilstm\n"
      "context = word\n"
      "feature_level = morpheme\n"
      "lr = [0.01, 0.001]\n"
      "hidden_size = [64, 128]\n",
      "mem");
  const auto configs = expand_grid(axes, "mem");
  REQUIRE(configs.size() == 4);
  CHECK(configs[0].lr == 0.01);
  CHECK(configs[0].hidden_size == 64);
  CHECK(configs[1].lr == 0.01);
  CHECK(configs[1].hidden_size == 128);
  CHECK(configs[2].lr == 0.001);
  CHECK(configs[3].hidden_size == 128);
  CHECK_THROWS_AS(expand_grid({}, "mem"), ConfigError);
}

TEST_CASE("grid search ranks, persists and resumes trials") {
  const Corpus corpus = deterministic_corpus(60, 12, 6, 21);
  const auto [train_part, valid_part] = split_validation(corpus, 0.2, 2);

  std::vector<TrainConfig> configs;
  for (double lr : {0.02, 0.0005}) {
    TrainConfig c = fast_config();
    c.lr = lr;
    c.max_epochs = 4;
    configs.push_back(c);
  }

  testing::TempDir dir("sweep");
  GridOptions options;
  options.out_dir = dir.file("out");
  options.jobs = 1;
  options.grid_constrained = false;

  const auto ranked = grid_search(configs, train_part, valid_part, options);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].best_val_macro_f1 >= ranked[1].best_val_macro_f1);
  CHECK(ranked[0].status == "ok");

  // the ranking is a permutation of the input configurations
  std::set<std::string> in_hashes, out_hashes;
  for (const auto& c : configs) in_hashes.insert(c.hash());
  for (const auto& t : ranked) out_hashes.insert(t.config_hash);
  CHECK(in_hashes == out_hashes);
  for (const auto& trial : ranked) {
    CHECK(std::filesystem::exists(
        std::filesystem::path(options.out_dir) / (trial.config_hash + ".json")));
  }

  // resume: byte-identical trial files after a second pass over the sweep
  std::map<std::string, std::string> before;
  for (const auto& trial : ranked) {
    const auto path =
        (std::filesystem::path(options.out_dir) / (trial.config_hash + ".json"))
            .string();
    before[trial.config_hash] = testing::read_file(path);
  }
  const auto resumed = grid_search(configs, train_part, valid_part, options);
  for (const auto& trial : resumed) {
    const auto path =
        (std::filesystem::path(options.out_dir) / (trial.config_hash + ".json"))
            .string();
    CHECK(testing::read_file(path) == before[trial.config_hash]);
  }
  // resumed results carry the same scores
  CHECK(resumed[0].best_val_macro_f1 == ranked[0].best_val_macro_f1);

  // a singleton grid equals a direct train() call
  const auto single = grid_search({configs[0]}, train_part, valid_part,
                                  GridOptions{"", 1, false});
  const auto direct = train(configs[0], train_part, valid_part);
  CHECK(single[0].best_val_macro_f1 == direct.result.best_val_macro_f1);
  CHECK(single[0].epochs.size() == direct.result.epochs.size());
}

TEST_CASE("grid search keeps going when a trial fails") {
  const Corpus corpus = deterministic_corpus(40, 10, 5, 22);
  const auto [train_part, valid_part] = split_validation(corpus, 0.25, 2);
  TrainConfig good = fast_config();
  good.max_epochs = 2;
  TrainConfig bad = good;
  bad.weight_decay = 1e300;  // drives parameters to overflow, then NaN

  const auto ranked = grid_search({bad, good}, train_part, valid_part,
                                  GridOptions{"", 1, false});
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].status == "ok");
  CHECK(ranked[1].status == "failed");
  CHECK_FALSE(ranked[1].error.empty());
}

TEST_CASE("trial results round-trip through JSON") {
  const Corpus corpus = deterministic_corpus(40, 10, 5, 23);
  const auto [train_part, valid_part] = split_validation(corpus, 0.25, 2);
  TrainConfig config = fast_config();
  config.max_epochs = 3;
  auto outcome = train(config, train_part, valid_part);
  outcome.result.test_report = evaluate_model(outcome.model, valid_part);

  const std::string json = outcome.result.to_json_string();
  const TrialResult parsed = TrialResult::from_json_string(json, "mem");
  CHECK(parsed.config_hash == outcome.result.config_hash);
  CHECK(parsed.config.hash() == outcome.result.config.hash());
  CHECK(parsed.best_val_macro_f1 == outcome.result.best_val_macro_f1);
  REQUIRE(parsed.epochs.size() == outcome.result.epochs.size());
  for (std::size_t i = 0; i < parsed.epochs.size(); ++i) {
    CHECK(parsed.epochs[i].train_loss ==
          outcome.result.epochs[i].train_loss);
  }
  REQUIRE(parsed.test_report.has_value());
  CHECK(parsed.test_report->micro_f1 == outcome.result.test_report->micro_f1);
}

TEST_CASE("run_seeds aggregates mean and sample deviation") {
  const Corpus corpus = deterministic_corpus(100, 14, 7, 31);
  const auto [train_part, test_part] = split_validation(corpus, 0.2, 6);
  TrainConfig config = fast_config();
  config.max_epochs = 25;

  SUBCASE("identical seeds have zero deviation") {
    const auto summary =
        run_seeds(config, train_part, test_part, {7, 7, 7, 7, 7});
    REQUIRE(summary.ok);
    CHECK(summary.std_macro_f1 == 0.0);
    CHECK(summary.std_micro_f1 == 0.0);
    REQUIRE(summary.runs.size() == 5);
    for (const auto& run : summary.runs) {
      CHECK(run.report->macro_f1 == summary.runs[0].report->macro_f1);
    }
  }

  SUBCASE("aggregate mean matches the arithmetic mean of per-seed scores") {
    const auto summary =
        run_seeds(config, train_part, test_part, {1, 2, 3, 4, 5});
    REQUIRE(summary.ok);
    double mean = 0.0;
    for (const auto& run : summary.runs) mean += run.report->macro_f1;
    mean /= static_cast<double>(summary.runs.size());
    CHECK(std::abs(summary.mean_macro_f1 - mean) < 1e-12);
    // the oracle corpus is a deterministic lookup: all five seeds learn it
    CHECK(summary.mean_micro_f1 >= 0.99);
    CHECK(summary.std_micro_f1 <= 0.01);
  }

  SUBCASE("a failed seed fails the aggregate but keeps partial results") {
    TrainConfig explosive = config;
    explosive.weight_decay = 1e300;
    auto broken = run_seeds(explosive, train_part, test_part, {1});
    CHECK_FALSE(broken.ok);
    REQUIRE(broken.runs.size() == 1);
    CHECK(broken.runs[0].status == "failed");
  }
}
