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

// morphtag: batch CLI for the morphological tagging pipeline.
// Subcommands: split, train, gridsearch, tag, evaluate, seeds.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "morphtag/checkpoint.hpp"
#include "morphtag/manifest.hpp"
#include "morphtag/training.hpp"

namespace fs = std::filesystem;
using namespace morphtag;

namespace {

int g_argc = 0;
char** g_argv = nullptr;

RunManifest new_manifest() { return RunManifest::begin(g_argc, g_argv); }

void require_writable(const std::string& path, bool force) {
  if (!force && fs::exists(path)) {
    throw ConfigError("refusing to overwrite existing file: " + path +
                      " (pass --force to allow)");
  }
}

std::string default_out_dir() {
  const char* env = std::getenv("MORPHTAG_OUT_DIR");
  return env != nullptr ? std::string(env) : std::string();
}

std::string resolve_out_dir(const std::string& flag_value,
                            const char* flag_name) {
  if (!flag_value.empty()) return flag_value;
  const std::string env = default_out_dir();
  if (!env.empty()) return env;
  throw ConfigError(std::string(flag_name) +
                    " is required (or set MORPHTAG_OUT_DIR)");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find(',', begin);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(begin, end - begin);
    if (item.empty()) throw ConfigError("bad --seeds list: '" + text + "'");
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("bad seed value: '" + item + "'");
    }
    if (end == text.size()) break;
    begin = end + 1;
  }
  if (seeds.empty()) throw ConfigError("--seeds list is empty");
  return seeds;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw IoError("write error: " + path);
}

struct SplitArgs {
  std::string input, out_train, out_valid, kind = "canonical", language;
  double ratio = 0.1;
  std::uint64_t seed = 1;
  bool force = false;
};

void cmd_split(const SplitArgs& args) {
  if (!(args.ratio > 0.0 && args.ratio < 1.0)) {
    throw ConfigError("--ratio must lie strictly between 0 and 1");
  }
  require_writable(args.out_train, args.force);
  require_writable(args.out_valid, args.force);
  const Corpus corpus = load_corpus(
      args.input, segmentation_kind_from_string(args.kind), args.language);
  const auto [train_part, valid_part] =
      split_validation(corpus, args.ratio, args.seed);
  save_corpus(train_part, args.out_train);
  save_corpus(valid_part, args.out_valid);

  RunManifest manifest = new_manifest();
  manifest.add_input(args.input);
  manifest.seeds = {args.seed};
  manifest.write(args.out_train + ".manifest.json");
  std::cout << "split " << corpus.sentences.size() << " sentences into "
            << train_part.sentences.size() << " train / "
            << valid_part.sentences.size() << " validation\n";
}

struct TrainArgs {
  std::string config_path, train_path, valid_path, out_model;
  std::string kind = "canonical", language;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  bool force = false;
};

void cmd_train(const TrainArgs& args) {
  require_writable(args.out_model, args.force);
  TrainConfig config =
      TrainConfig::from_values(load_config(args.config_path), args.config_path);
  if (args.has_seed_override) config.seed = args.seed_override;
  config.validate(false);

  const SegmentationKind kind = segmentation_kind_from_string(args.kind);
  const Corpus train_corpus = load_corpus(args.train_path, kind, args.language);
  const Corpus valid_corpus = load_corpus(args.valid_path, kind, args.language);

  const TrainOutcome outcome = train(config, train_corpus, valid_corpus);
  save_model(outcome.model, args.out_model);
  write_text_file(args.out_model + ".trial.json",
                  outcome.result.to_json_string() + "\n");

  RunManifest manifest = new_manifest();
  manifest.config_hash = config.hash();
  manifest.add_input(args.config_path);
  manifest.add_input(args.train_path);
  manifest.add_input(args.valid_path);
  manifest.seeds = {config.seed};
  manifest.write(args.out_model + ".manifest.json");

  std::cout << "trained " << to_string(config.model_kind) << " ("
            << to_string(config.context) << ", "
            << to_string(config.feature_level) << ") for "
            << outcome.result.epochs.size() << " epochs; best epoch "
            << outcome.result.best_epoch << " validation macro F1 "
            << outcome.result.best_val_macro_f1 << "\n";
}

struct GridArgs {
  std::string grid_path, train_path, valid_path, out_dir;
  std::string kind = "canonical", language;
  int jobs = 1;
  bool allow_free_values = false;
};

void cmd_gridsearch(const GridArgs& args) {
  const std::string out_dir = resolve_out_dir(args.out_dir, "--out-dir");
  const auto configs =
      expand_grid(load_grid(args.grid_path), args.grid_path);
  const SegmentationKind kind = segmentation_kind_from_string(args.kind);
  const Corpus train_corpus = load_corpus(args.train_path, kind, args.language);
  const Corpus valid_corpus = load_corpus(args.valid_path, kind, args.language);

  GridOptions options;
  options.out_dir = out_dir;
  options.jobs = args.jobs;
  options.grid_constrained = !args.allow_free_values;
  const auto ranked = grid_search(configs, train_corpus, valid_corpus, options);

  nlohmann::json summary = nlohmann::json::array();
  std::ostringstream table;
  table << "rank\tmacro_f1\tmicro_f1\tstatus\tconfig\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& trial = ranked[i];
    summary.push_back({{"rank", i + 1},
                       {"config_hash", trial.config_hash},
                       {"status", trial.status},
                       {"best_val_macro_f1", trial.best_val_macro_f1},
                       {"best_val_micro_f1", trial.best_val_micro_f1},
                       {"best_epoch", trial.best_epoch}});
    table << (i + 1) << '\t' << trial.best_val_macro_f1 << '\t'
          << trial.best_val_micro_f1 << '\t' << trial.status << '\t'
          << trial.config_hash << '\n';
  }
  write_text_file((fs::path(out_dir) / "summary.json").string(),
                  summary.dump(2) + "\n");
  write_text_file((fs::path(out_dir) / "summary.txt").string(), table.str());

  RunManifest manifest = new_manifest();
  manifest.add_input(args.grid_path);
  manifest.add_input(args.train_path);
  manifest.add_input(args.valid_path);
  manifest.write((fs::path(out_dir) / "manifest.json").string());

  std::cout << table.str();
}

struct TagArgs {
  std::string model_path, input_path, out_path, context;
  bool force = false;
};

void cmd_tag(const TagArgs& args) {
  require_writable(args.out_path, args.force);
  const TaggerModel model = load_model(args.model_path);
  if (!args.context.empty()) {
    const ContextMode requested = context_mode_from_string(args.context);
    if (requested != model.context) {
      std::cerr << "warning: model was trained in " << to_string(model.context)
                << " context; ignoring --context " << args.context << "\n";
    }
  }
  const auto sentences = load_segmented(args.input_path);
  const Corpus tagged = tag_corpus(model, sentences);

  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + args.out_path);
  for (std::size_t s = 0; s < tagged.sentences.size(); ++s) {
    if (s > 0) out << '\n';
    for (const auto& word : tagged.sentences[s].words) {
      out << word.raw_word << '\t' << format_analysis(word) << '\n';
    }
  }
  out.close();

  RunManifest manifest = new_manifest();
  manifest.add_input(args.model_path);
  manifest.add_input(args.input_path);
  manifest.write(args.out_path + ".manifest.json");
  std::cout << "tagged " << tagged.word_count() << " words\n";
}

struct EvaluateArgs {
  std::string gold_path, pred_path, model_path, test_path, report_path;
  std::string kind = "canonical";
  bool allow_kind_mismatch = false;
};

void cmd_evaluate(const EvaluateArgs& args) {
  const bool file_mode = !args.gold_path.empty() || !args.pred_path.empty();
  const bool model_mode = !args.model_path.empty() || !args.test_path.empty();
  if (file_mode == model_mode) {
    throw ConfigError("pass either --gold with --pred, or --model with --test");
  }

  EvalReport report;
  if (file_mode) {
    if (args.gold_path.empty() || args.pred_path.empty()) {
      throw ConfigError("--gold and --pred must be given together");
    }
    report = evaluate_files(args.gold_path, args.pred_path, &std::cerr);
  } else {
    if (args.model_path.empty() || args.test_path.empty()) {
      throw ConfigError("--model and --test must be given together");
    }
    const TaggerModel model = load_model(args.model_path);
    const SegmentationKind kind = segmentation_kind_from_string(args.kind);
    if (kind != model.segmentation && !args.allow_kind_mismatch) {
      throw ConfigError(
          "model was trained on " + to_string(model.segmentation) +
          " segmentations but the test corpus is " + to_string(kind) +
          "; scores for the two kinds are not directly comparable "
          "(pass --allow-kind-mismatch to proceed)");
    }
    const Corpus test = load_corpus(args.test_path, kind);
    const Corpus predicted = tag_corpus(model, strip_tags(test));
    report = evaluate_corpora(test, predicted, &std::cerr);
  }

  std::cout << report.to_text();
  if (!args.report_path.empty()) {
    write_text_file(args.report_path, report.to_json_string() + "\n");
    RunManifest manifest = new_manifest();
    if (file_mode) {
      manifest.add_input(args.gold_path);
      manifest.add_input(args.pred_path);
    } else {
      manifest.add_input(args.model_path);
      manifest.add_input(args.test_path);
    }
    manifest.write(args.report_path + ".manifest.json");
  }
}

struct SeedsArgs {
  std::string config_path, train_path, test_path, out_dir;
  std::string kind = "canonical", language;
  std::string seeds = "1,2,3,4,5";
};

void cmd_seeds(const SeedsArgs& args) {
  const std::string out_dir = resolve_out_dir(args.out_dir, "--out-dir");
  const TrainConfig config =
      TrainConfig::from_values(load_config(args.config_path), args.config_path);
  config.validate(false);
  const auto seeds = parse_seed_list(args.seeds);

  const SegmentationKind kind = segmentation_kind_from_string(args.kind);
  const Corpus train_full = load_corpus(args.train_path, kind, args.language);
  const Corpus test = load_corpus(args.test_path, kind, args.language);

  fs::create_directories(out_dir);
  const SeedsSummary summary = run_seeds(config, train_full, test, seeds);

  for (const auto& run : summary.runs) {
    const std::string stem =
        (fs::path(out_dir) / ("seed_" + std::to_string(run.seed))).string();
    if (run.model) save_model(*run.model, stem + ".ckpt");
    if (run.report) {
      write_text_file(stem + ".report.json",
                      run.report->to_json_string() + "\n");
    }
    write_text_file(stem + ".trial.json", run.trial.to_json_string() + "\n");
  }
  write_text_file((fs::path(out_dir) / "aggregate.json").string(),
                  summary.to_json_string() + "\n");

  RunManifest manifest = new_manifest();
  manifest.config_hash = config.hash();
  manifest.add_input(args.config_path);
  manifest.add_input(args.train_path);
  manifest.add_input(args.test_path);
  manifest.seeds = seeds;
  manifest.write((fs::path(out_dir) / "manifest.json").string());

  std::cout << "seeds " << summary.runs.size() << " runs, status "
            << (summary.ok ? "ok" : "failed") << "\n";
  if (summary.ok) {
    std::cout << "macro_f1 " << summary.mean_macro_f1 << " +- "
              << summary.std_macro_f1 << "\n"
              << "micro_f1 " << summary.mean_micro_f1 << " +- "
              << summary.std_micro_f1 << "\n";
  } else {
    for (const auto& run : summary.runs) {
      if (run.status != "ok") {
        std::cout << "seed " << run.seed << " failed: " << run.error << "\n";
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  g_argc = argc;
  g_argv = argv;

  CLI::App app{"morphtag: neural morphological tagging for agglutinative "
               "languages"};
  app.require_subcommand(1);

  SplitArgs split_args;
  auto* split = app.add_subcommand(
      "split", "split a corpus into train/validation parts");
  split->add_option("--input", split_args.input)->required();
  split->add_option("--ratio", split_args.ratio,
                    "validation fraction (default 0.1)");
  split->add_option("--seed", split_args.seed);
  split->add_option("--out-train", split_args.out_train)->required();
  split->add_option("--out-valid", split_args.out_valid)->required();
  split->add_option("--kind", split_args.kind, "canonical|surface");
  split->add_option("--language", split_args.language);
  split->add_flag("--force", split_args.force);
  split->callback([&]() { cmd_split(split_args); });

  TrainArgs train_args;
  auto* train_cmd =
      app.add_subcommand("train", "train one tagger configuration");
  train_cmd->add_option("--config", train_args.config_path)->required();
  train_cmd->add_option("--train", train_args.train_path)->required();
  train_cmd->add_option("--valid", train_args.valid_path)->required();
  train_cmd->add_option("--out-model", train_args.out_model)->required();
  auto* seed_opt = train_cmd->add_option("--seed", train_args.seed_override,
                                         "override the config seed");
  train_cmd->add_option("--kind", train_args.kind, "canonical|surface");
  train_cmd->add_option("--language", train_args.language);
  train_cmd->add_flag("--force", train_args.force);
  train_cmd->callback([&, seed_opt]() {
    train_args.has_seed_override = seed_opt->count() > 0;
    cmd_train(train_args);
  });

  GridArgs grid_args;
  auto* grid = app.add_subcommand(
      "gridsearch", "grid search over hyperparameter configurations");
  grid->add_option("--grid", grid_args.grid_path)->required();
  grid->add_option("--train", grid_args.train_path)->required();
  grid->add_option("--valid", grid_args.valid_path)->required();
  grid->add_option("--out-dir", grid_args.out_dir,
                   "sweep directory (default $MORPHTAG_OUT_DIR)");
  grid->add_option("--jobs", grid_args.jobs, "parallel trials (default 1)");
  grid->add_option("--kind", grid_args.kind, "canonical|surface");
  grid->add_option("--language", grid_args.language);
  grid->add_flag("--allow-free-values", grid_args.allow_free_values,
                 "skip the search-range checks on grid values");
  grid->callback([&]() { cmd_gridsearch(grid_args); });

  TagArgs tag_args;
  auto* tag = app.add_subcommand("tag", "tag segmented text with a model");
  tag->add_option("--model", tag_args.model_path)->required();
  tag->add_option("--input", tag_args.input_path,
                  "segmented text, one word per line, morphemes joined by '-'")
      ->required();
  tag->add_option("--out", tag_args.out_path)->required();
  tag->add_option("--context", tag_args.context,
                  "word|sentence (the model's own context wins)");
  tag->add_flag("--force", tag_args.force);
  tag->callback([&]() { cmd_tag(tag_args); });

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand(
      "evaluate", "aligned multiset F1 of predictions against gold");
  evaluate->add_option("--gold", eval_args.gold_path);
  evaluate->add_option("--pred", eval_args.pred_path);
  evaluate->add_option("--model", eval_args.model_path);
  evaluate->add_option("--test", eval_args.test_path);
  evaluate->add_option("--report", eval_args.report_path,
                       "write the report as JSON to this path");
  evaluate->add_option("--kind", eval_args.kind, "canonical|surface");
  evaluate->add_flag("--allow-kind-mismatch", eval_args.allow_kind_mismatch);
  evaluate->callback([&]() { cmd_evaluate(eval_args); });

  SeedsArgs seeds_args;
  auto* seeds = app.add_subcommand(
      "seeds", "train one frozen config across several seeds");
  seeds->add_option("--config", seeds_args.config_path)->required();
  seeds->add_option("--train-full", seeds_args.train_path)->required();
  seeds->add_option("--test", seeds_args.test_path)->required();
  seeds->add_option("--seeds", seeds_args.seeds, "comma-separated seed list");
  seeds->add_option("--out-dir", seeds_args.out_dir,
                    "output directory (default $MORPHTAG_OUT_DIR)");
  seeds->add_option("--kind", seeds_args.kind, "canonical|surface");
  seeds->add_option("--language", seeds_args.language);
  seeds->callback([&]() { cmd_seeds(seeds_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const NonFiniteGradient& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const ShapeMismatch& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const NotScalar& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
