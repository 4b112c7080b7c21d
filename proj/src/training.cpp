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

#include "morphtag/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "morphtag/manifest.hpp"
#include "morphtag/optim.hpp"

namespace morphtag {

namespace {

std::string double_repr(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return nlohmann::json(v).dump();  // shortest round-trip form
}

double parse_double(const std::string& value, const std::string& where) {
  if (value == "inf" || value == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + value + "'");
  }
}

long parse_long(const std::string& value, const std::string& where) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected an integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& value, const std::string& where) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(where + ": expected true/false, got '" + value + "'");
}

}  // namespace

void TrainConfig::validate(bool grid_constrained) const {
  auto complain = [](const std::string& what) {
    throw ConfigError("invalid configuration: " + what);
  };
  if (!(lr > 0.0) || !std::isfinite(lr)) complain("lr must be positive");
  if (weight_decay < 0.0 || !std::isfinite(weight_decay)) {
    complain("weight_decay must be non-negative");
  }
  if (hidden_size < 1) complain("hidden_size must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) complain("dropout must lie in [0, 1)");
  if (!(clip_norm > 0.0)) complain("clip_norm must be positive or inf");
  if (max_epochs < 1) complain("max_epochs must be >= 1");
  if (patience < 0) complain("patience must be >= 0");
  if (batch_size < 1) complain("batch_size must be >= 1");
  if (embedding_dim < 1) complain("embedding_dim must be >= 1");
  if (min_count < 0) complain("min_count must be >= 0");
  if (!grid_constrained) return;

  // Search-range checks used by the sweep runner.
  if (lr < 1e-6 || lr > 1e-1) complain("grid lr must lie in [1e-6, 1e-1]");
  if (weight_decay != 0.0 && (weight_decay < 1e-10 || weight_decay > 1e-3)) {
    complain("grid weight_decay must be 0 or lie in [1e-10, 1e-3]");
  }
  bool hidden_ok = false;
  for (int h = 64; h <= 2048; h *= 2) hidden_ok |= (hidden_size == h);
  if (!hidden_ok) complain("grid hidden_size must be a power of two in 64..2048");
  if (dropout != 0.0 && dropout != 0.1 && dropout != 0.2 && dropout != 0.3) {
    complain("grid dropout must be one of {0, 0.1, 0.2, 0.3}");
  }
  if (!std::isinf(clip_norm) && clip_norm != 0.5 && clip_norm != 1.0 &&
      clip_norm != 2.0 && clip_norm != 4.0) {
    complain("grid clip_norm must be one of {0.5, 1, 2, 4, inf}");
  }
}

std::map<std::string, std::string> TrainConfig::to_map() const {
  return {
      {"lr", double_repr(lr)},
      {"weight_decay", double_repr(weight_decay)},
      {"hidden_size", std::to_string(hidden_size)},
      {"dropout", double_repr(dropout)},
      {"clip_norm", double_repr(clip_norm)},
      {"max_epochs", std::to_string(max_epochs)},
      {"patience", std::to_string(patience)},
      {"batch_size", std::to_string(batch_size)},
      {"seed", std::to_string(seed)},
      {"model_kind", to_string(model_kind)},
      {"context", to_string(context)},
      {"feature_level", to_string(feature_level)},
      {"lowercase", lowercase ? "true" : "false"},
      {"embedding_dim", std::to_string(embedding_dim)},
      {"min_count", std::to_string(min_count)},
  };
}

std::string TrainConfig::canonical_text() const {
  std::ostringstream out;
  for (const auto& [key, value] : to_map()) {
    out << key << " = " << value << '\n';
  }
  return out.str();
}

std::string TrainConfig::hash() const { return fnv1a64_hex(canonical_text()); }

void TrainConfig::apply(const std::string& key, const std::string& value,
                        const std::string& source) {
  const std::string where = source + " key '" + key + "'";
  if (key == "lr") {
    lr = parse_double(value, where);
  } else if (key == "weight_decay") {
    weight_decay = parse_double(value, where);
  } else if (key == "hidden_size") {
    hidden_size = static_cast<int>(parse_long(value, where));
  } else if (key == "dropout") {
    dropout = parse_double(value, where);
  } else if (key == "clip_norm") {
    clip_norm = parse_double(value, where);
  } else if (key == "max_epochs") {
    max_epochs = static_cast<int>(parse_long(value, where));
  } else if (key == "patience") {
    patience = static_cast<int>(parse_long(value, where));
  } else if (key == "batch_size") {
    batch_size = static_cast<int>(parse_long(value, where));
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_long(value, where));
  } else if (key == "model_kind") {
    model_kind = model_kind_from_string(value);
  } else if (key == "context") {
    context = context_mode_from_string(value);
  } else if (key == "feature_level") {
    feature_level = feature_level_from_string(value);
  } else if (key == "lowercase") {
    lowercase = parse_bool(value, where);
  } else if (key == "embedding_dim") {
    embedding_dim = static_cast<int>(parse_long(value, where));
  } else if (key == "min_count") {
    min_count = static_cast<int>(parse_long(value, where));
  } else {
    throw ConfigError(source + ": unknown config key '" + key + "'");
  }
}

const std::vector<std::string>& TrainConfig::required_keys() {
  static const std::vector<std::string> keys = {
      "model_kind", "context", "feature_level", "lr", "hidden_size"};
  return keys;
}

TrainConfig TrainConfig::from_values(const ConfigValues& values,
                                     const std::string& source) {
  TrainConfig config;
  for (const auto& [key, value] : values) {
    config.apply(key, value, source);
  }
  for (const auto& key : required_keys()) {
    if (std::none_of(values.begin(), values.end(),
                     [&](const auto& kv) { return kv.first == key; })) {
      throw ConfigError(source + ": missing required config key '" + key +
                        "'");
    }
  }
  return config;
}

std::vector<TrainConfig> expand_grid(const GridAxes& axes,
                                     const std::string& source) {
  if (axes.empty()) throw ConfigError(source + ": empty grid");
  ConfigValues probe;
  for (const auto& [key, list] : axes) probe.emplace_back(key, list.front());
  TrainConfig::from_values(probe, source);  // key/required validation

  std::vector<TrainConfig> configs;
  std::vector<std::size_t> index(axes.size(), 0);
  while (true) {
    ConfigValues values;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      values.emplace_back(axes[a].first, axes[a].second[index[a]]);
    }
    configs.push_back(TrainConfig::from_values(values, source));
    // odometer, last axis fastest
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++index[a] < axes[a].second.size()) break;
      index[a] = 0;
      if (a == 0) return configs;
    }
  }
}

std::string TrialResult::to_json_string() const {
  nlohmann::json epochs_json = nlohmann::json::array();
  for (const auto& e : epochs) {
    epochs_json.push_back({{"train_loss", e.train_loss},
                           {"val_macro_f1", e.val_macro_f1},
                           {"val_micro_f1", e.val_micro_f1}});
  }
  nlohmann::json config_json = nlohmann::json::object();
  for (const auto& [key, value] : config.to_map()) config_json[key] = value;
  nlohmann::json j{{"config", config_json},
                   {"config_hash", config_hash},
                   {"status", status},
                   {"error", error},
                   {"epochs", epochs_json},
                   {"best_epoch", best_epoch},
                   {"best_val_macro_f1", best_val_macro_f1},
                   {"best_val_micro_f1", best_val_micro_f1},
                   {"wall_seconds", wall_seconds}};
  if (test_report) {
    j["test_report"] = nlohmann::json::parse(test_report->to_json_string());
  } else {
    j["test_report"] = nullptr;
  }
  return j.dump(2);
}

TrialResult TrialResult::from_json_string(const std::string& text,
                                          const std::string& source) {
  TrialResult result;
  try {
    const auto j = nlohmann::json::parse(text);
    ConfigValues values;
    for (const auto& [key, value] : j.at("config").items()) {
      values.emplace_back(key, value.get<std::string>());
    }
    result.config = TrainConfig::from_values(values, source);
    result.config_hash = j.at("config_hash").get<std::string>();
    result.status = j.at("status").get<std::string>();
    result.error = j.at("error").get<std::string>();
    for (const auto& e : j.at("epochs")) {
      result.epochs.push_back(EpochStats{e.at("train_loss").get<double>(),
                                         e.at("val_macro_f1").get<double>(),
                                         e.at("val_micro_f1").get<double>()});
    }
    result.best_epoch = j.at("best_epoch").get<int>();
    result.best_val_macro_f1 = j.at("best_val_macro_f1").get<double>();
    result.best_val_micro_f1 = j.at("best_val_micro_f1").get<double>();
    result.wall_seconds = j.at("wall_seconds").get<double>();
    if (!j.at("test_report").is_null()) {
      result.test_report =
          EvalReport::from_json_string(j.at("test_report").dump(), source);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(source + ": bad trial record: " + e.what());
  }
  return result;
}

Tensor batch_loss(const BoundModel& bound,
                  const std::vector<const EncodedSequence*>& batch, bool train,
                  std::mt19937_64* rng, int* denom) {
  if (batch.empty()) throw Error("batch_loss: empty batch");
  const TaggerModel& model = *bound.model;
  Tensor total;
  int count = 0;
  bool first = true;
  for (const EncodedSequence* seq : batch) {
    const Tensor emissions = sequence_emissions(bound, *seq, train, rng);
    Tensor loglik;
    if (model.kind == ModelKind::bilstm) {
      std::vector<std::pair<int, int>> picked;
      for (int l = 0; l < seq->length(); ++l) {
        if (!seq->supervised[static_cast<std::size_t>(l)]) continue;
        const int tag = seq->tag_ids[static_cast<std::size_t>(l)];
        if (tag < 0) {
          throw UnknownTag("supervised position without a known gold tag");
        }
        picked.emplace_back(l, tag);
      }
      loglik = sum_all(pick(log_softmax_rows(emissions), picked));
      count += static_cast<int>(picked.size());
    } else {
      std::vector<int> path(static_cast<std::size_t>(seq->length()));
      for (int l = 0; l < seq->length(); ++l) {
        const auto idx = static_cast<std::size_t>(l);
        if (seq->supervised[idx]) {
          if (seq->tag_ids[idx] < 0) {
            throw UnknownTag("supervised position without a known gold tag");
          }
          path[idx] = seq->tag_ids[idx];
        } else {
          path[idx] = model.boundary_tag_id();
        }
      }
      const Tensor log_z = crf_log_partition(emissions, bound.crf_trans,
                                             bound.crf_start, bound.crf_end);
      const Tensor gold = crf_path_score(emissions, bound.crf_trans,
                                         bound.crf_start, bound.crf_end, path);
      loglik = sub(gold, log_z);
      count += 1;
    }
    total = first ? loglik : add(total, loglik);
    first = false;
  }
  if (denom != nullptr) *denom = count;
  return scale(total, -1.0 / count);
}

ValidationScore validation_scores(const TaggerModel& model,
                                  const Corpus& corpus) {
  std::vector<WordScore> scores;
  std::set<std::string> universe;
  for (const auto& sentence : corpus.sentences) {
    SegmentedSentence segmented;
    for (const auto& word : sentence.words) {
      SegmentedWord sw;
      sw.raw_word = word.raw_word;
      for (const auto& tm : word.analysis) sw.morphemes.push_back(tm.morpheme);
      segmented.push_back(std::move(sw));
    }
    const auto predicted = tag_sentence(model, segmented);
    for (std::size_t w = 0; w < sentence.words.size(); ++w) {
      std::vector<std::string> gold_tags, pred_tags;
      for (const auto& tm : sentence.words[w].analysis) {
        gold_tags.push_back(tm.tag);
        universe.insert(tm.tag);
      }
      for (const auto& tm : predicted[w].analysis) {
        pred_tags.push_back(tm.tag);
        universe.insert(tm.tag);
      }
      scores.push_back(score_word(gold_tags, pred_tags));
    }
  }
  ValidationScore out;
  if (scores.empty()) return out;
  out.macro_f1 = macro_f1(scores, universe);
  out.micro_f1 = micro_f1(scores).f1;
  return out;
}

EvalReport evaluate_model(const TaggerModel& model, const Corpus& test) {
  const Corpus predicted = tag_corpus(model, strip_tags(test));
  return evaluate_corpora(test, predicted, nullptr);
}

namespace {

// Leaf tensors of a bound model in TaggerModel::parameters() order.
std::vector<Tensor> bound_leaves(const TaggerModel& model,
                                 const BoundModel& bound) {
  std::vector<Tensor> leaves{bound.embeddings};
  if (model.features.level == FeatureLevel::char_sum) {
    leaves.push_back(bound.boundary_vec);
  }
  leaves.insert(leaves.end(),
                {bound.fwd_wi, bound.fwd_wr, bound.fwd_b, bound.bwd_wi,
                 bound.bwd_wr, bound.bwd_b, bound.proj_w, bound.proj_b});
  if (model.crf) {
    leaves.insert(leaves.end(),
                  {bound.crf_trans, bound.crf_start, bound.crf_end});
  }
  return leaves;
}

}  // namespace

TrainOutcome train(const TrainConfig& config, const Corpus& train_corpus,
                   const Corpus& valid_corpus) {
  config.validate(false);
  if (train_corpus.sentences.empty()) {
    throw EmptyCorpus("training corpus has no sentences");
  }
  const bool has_valid = !valid_corpus.sentences.empty();
  if (has_valid && valid_corpus.kind != train_corpus.kind) {
    throw ConfigError("train and validation corpora differ in segmentation kind");
  }
  const auto t0 = std::chrono::steady_clock::now();

  const Vocabulary vocab =
      build_vocabulary(train_corpus, config.min_count, config.lowercase);
  TaggerModel model = init_model(
      vocab, config.feature_config(), config.model_kind, config.context,
      config.hidden_size, config.dropout, config.seed, train_corpus.kind,
      train_corpus.language_id);
  const auto sequences = encode_corpus(train_corpus, model.vocab,
                                       config.context, EncodeMode::training);

  // Separate stream from parameter init so both are reproducible.
  std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL +
                      0x2545F4914F6CDD1DULL);
  AdamOptimizer adam(AdamConfig{config.lr, 0.9, 0.999, 1e-8,
                                config.weight_decay, config.clip_norm});
  const auto params = model.parameters();

  TrialResult result;
  result.config = config;
  result.config_hash = config.hash();

  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<std::vector<double>> best_values;
  double best_macro = -1.0, best_micro = 0.0;
  int best_epoch = 0, stale = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    long denom_sum = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(config.batch_size));
      std::vector<const EncodedSequence*> batch;
      batch.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        batch.push_back(&sequences[order[k]]);
      }
      Tape tape;
      const BoundModel bound = bind(model, &tape);
      int denom = 0;
      const Tensor loss = batch_loss(bound, batch, true, &rng, &denom);
      tape.backward(loss);
      const auto leaves = bound_leaves(model, bound);
      std::vector<std::vector<double>> grads;
      grads.reserve(leaves.size());
      for (const auto& leaf : leaves) grads.push_back(tape.grad(leaf));
      try {
        adam.step(params, grads);
      } catch (const NonFiniteGradient& e) {
        throw NonFiniteGradient(std::string(e.what()) + " (epoch " +
                                std::to_string(epoch) + ", step " +
                                std::to_string(1 + begin / config.batch_size) +
                                ")");
      }
      loss_sum += loss.item() * denom;
      denom_sum += denom;
    }

    EpochStats stats;
    stats.train_loss = denom_sum > 0 ? loss_sum / denom_sum : 0.0;
    if (has_valid) {
      const ValidationScore vs = validation_scores(model, valid_corpus);
      stats.val_macro_f1 = vs.macro_f1;
      stats.val_micro_f1 = vs.micro_f1;
    }
    result.epochs.push_back(stats);

    if (has_valid) {
      if (stats.val_macro_f1 > best_macro) {
        best_macro = stats.val_macro_f1;
        best_micro = stats.val_micro_f1;
        best_epoch = epoch;
        stale = 0;
        best_values.clear();
        for (const Parameter* p : params) best_values.push_back(*p->value);
      } else {
        ++stale;
      }
      if (stale >= config.patience) break;
    }
  }

  if (has_valid && best_epoch > 0) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      *params[i]->value = best_values[i];
    }
    result.best_epoch = best_epoch;
    result.best_val_macro_f1 = best_macro;
    result.best_val_micro_f1 = best_micro;
  } else {
    result.best_epoch = static_cast<int>(result.epochs.size());
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return TrainOutcome{std::move(model), std::move(result)};
}

std::vector<TrialResult> grid_search(const std::vector<TrainConfig>& configs,
                                     const Corpus& train_corpus,
                                     const Corpus& valid_corpus,
                                     const GridOptions& options) {
  if (configs.empty()) throw ConfigError("grid search over zero configurations");
  for (const auto& config : configs) config.validate(options.grid_constrained);

  namespace fs = std::filesystem;
  if (!options.out_dir.empty()) fs::create_directories(options.out_dir);

  std::vector<TrialResult> results(configs.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string hash = configs[i].hash();
    if (!options.out_dir.empty()) {
      const fs::path path = fs::path(options.out_dir) / (hash + ".json");
      if (fs::exists(path)) {
        std::ifstream in(path);
        std::ostringstream buf;
        buf << in.rdbuf();
        results[i] = TrialResult::from_json_string(buf.str(), path.string());
        continue;
      }
    }
    todo.push_back(i);
  }

  auto run_one = [&](std::size_t i) {
    TrialResult trial;
    try {
      trial = train(configs[i], train_corpus, valid_corpus).result;
    } catch (const std::exception& e) {
      trial = TrialResult{};
      trial.config = configs[i];
      trial.config_hash = configs[i].hash();
      trial.status = "failed";
      trial.error = e.what();
    }
    if (!options.out_dir.empty()) {
      const fs::path path =
          fs::path(options.out_dir) / (trial.config_hash + ".json");
      std::ofstream out(path);
      out << trial.to_json_string() << '\n';
    }
    results[i] = std::move(trial);
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1 || todo.size() <= 1) {
    for (std::size_t i : todo) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t k = next.fetch_add(1);
        if (k >= todo.size()) break;
        run_one(todo[k]);
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), todo.size());
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<std::size_t> rank(results.size());
  std::iota(rank.begin(), rank.end(), 0);
  auto key = [&](std::size_t i) {
    const bool ok = results[i].status == "ok";
    return std::tuple<int, double, double, std::size_t>(
        ok ? 0 : 1, -results[i].best_val_macro_f1,
        -results[i].best_val_micro_f1, i);
  };
  std::sort(rank.begin(), rank.end(),
            [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<TrialResult> ranked;
  ranked.reserve(results.size());
  for (std::size_t i : rank) ranked.push_back(std::move(results[i]));
  return ranked;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / (n - 1.0))};
}

}  // namespace

std::string SeedsSummary::to_json_string() const {
  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto& run : runs) {
    nlohmann::json r{{"seed", run.seed},
                     {"status", run.status},
                     {"error", run.error}};
    r["report"] = run.report
                      ? nlohmann::json::parse(run.report->to_json_string())
                      : nlohmann::json(nullptr);
    runs_json.push_back(std::move(r));
  }
  const nlohmann::json j{{"runs", runs_json},
                         {"ok", ok},
                         {"mean_macro_f1", mean_macro_f1},
                         {"std_macro_f1", std_macro_f1},
                         {"mean_micro_f1", mean_micro_f1},
                         {"std_micro_f1", std_micro_f1}};
  return j.dump(2);
}

SeedsSummary run_seeds(const TrainConfig& config, const Corpus& train_full,
                       const Corpus& test,
                       const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("run_seeds: no seeds given");
  SeedsSummary summary;
  const Corpus no_validation{{}, train_full.language_id, train_full.kind};
  for (const std::uint64_t seed : seeds) {
    SeedRun run;
    run.seed = seed;
    TrainConfig cfg = config;
    cfg.seed = seed;
    try {
      TrainOutcome outcome = train(cfg, train_full, no_validation);
      run.report = evaluate_model(outcome.model, test);
      run.trial = std::move(outcome.result);
      run.trial.test_report = run.report;
      run.model = std::move(outcome.model);
    } catch (const std::exception& e) {
      run.status = "failed";
      run.error = e.what();
    }
    summary.runs.push_back(std::move(run));
  }
  summary.ok = std::all_of(summary.runs.begin(), summary.runs.end(),
                           [](const SeedRun& r) { return r.status == "ok"; });
  if (summary.ok) {
    std::vector<double> macros, micros;
    for (const auto& run : summary.runs) {
      macros.push_back(run.report->macro_f1);
      micros.push_back(run.report->micro_f1);
    }
    std::tie(summary.mean_macro_f1, summary.std_macro_f1) = mean_std(macros);
    std::tie(summary.mean_micro_f1, summary.std_micro_f1) = mean_std(micros);
  }
  return summary;
}

}  // namespace morphtag
