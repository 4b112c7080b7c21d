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

#include "morphtag/evaluation.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace morphtag {

namespace {

int total(const std::map<std::string, int>& counts) {
  int n = 0;
  for (const auto& [tag, c] : counts) n += c;
  return n;
}

double harmonic(double p, double r) {
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double ratio(long num, long denom) {
  return denom > 0 ? static_cast<double>(num) / static_cast<double>(denom)
                   : 0.0;
}

}  // namespace

int WordScore::gold_total() const { return total(gold); }
int WordScore::pred_total() const { return total(pred); }
int WordScore::intersection_total() const { return total(intersection); }

WordScore score_word(const std::vector<std::string>& gold_tags,
                     const std::vector<std::string>& pred_tags) {
  WordScore score;
  for (const auto& t : gold_tags) ++score.gold[t];
  for (const auto& t : pred_tags) ++score.pred[t];
  for (const auto& [tag, g] : score.gold) {
    auto it = score.pred.find(tag);
    if (it != score.pred.end()) {
      score.intersection[tag] = std::min(g, it->second);
    }
  }
  return score;
}

MicroScore micro_f1(const std::vector<WordScore>& scores) {
  long inter = 0, gold = 0, pred = 0;
  for (const auto& s : scores) {
    inter += s.intersection_total();
    gold += s.gold_total();
    pred += s.pred_total();
  }
  MicroScore out;
  out.precision = ratio(inter, pred);
  out.recall = ratio(inter, gold);
  out.f1 = harmonic(out.precision, out.recall);
  return out;
}

double macro_f1(const std::vector<WordScore>& scores,
                const std::set<std::string>& tag_universe) {
  if (tag_universe.empty()) {
    throw Error("macro_f1: empty tag universe");
  }
  double sum = 0.0;
  for (const auto& tag : tag_universe) {
    long inter = 0, gold = 0, pred = 0;
    for (const auto& s : scores) {
      auto find = [&](const std::map<std::string, int>& m) -> long {
        auto it = m.find(tag);
        return it == m.end() ? 0 : it->second;
      };
      inter += find(s.intersection);
      gold += find(s.gold);
      pred += find(s.pred);
    }
    sum += harmonic(ratio(inter, pred), ratio(inter, gold));
  }
  return sum / static_cast<double>(tag_universe.size());
}

EvalReport build_report(const std::vector<WordScore>& scores,
                        long mismatch_count) {
  EvalReport report;
  report.word_count = static_cast<long>(scores.size());
  report.mismatch_count = mismatch_count;

  for (const auto& s : scores) {
    for (const auto& [tag, c] : s.gold) report.per_tag[tag].gold += c;
    for (const auto& [tag, c] : s.pred) report.per_tag[tag].pred += c;
    for (const auto& [tag, c] : s.intersection) {
      report.per_tag[tag].intersection += c;
    }
  }

  long inter = 0, gold = 0, pred = 0;
  double macro_sum = 0.0;
  for (auto& [tag, st] : report.per_tag) {
    st.precision = ratio(st.intersection, st.pred);
    st.recall = ratio(st.intersection, st.gold);
    st.f1 = harmonic(st.precision, st.recall);
    inter += st.intersection;
    gold += st.gold;
    pred += st.pred;
    macro_sum += st.f1;
  }
  report.micro_precision = ratio(inter, pred);
  report.micro_recall = ratio(inter, gold);
  report.micro_f1 = harmonic(report.micro_precision, report.micro_recall);
  report.macro_f1 = report.per_tag.empty()
                        ? 0.0
                        : macro_sum / static_cast<double>(report.per_tag.size());
  return report;
}

EvalReport evaluate_corpora(const Corpus& gold, const Corpus& pred,
                            std::ostream* warnings) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw AlignmentError(
        "sentence count mismatch: gold has " +
        std::to_string(gold.sentences.size()) + ", prediction has " +
        std::to_string(pred.sentences.size()));
  }
  std::vector<WordScore> scores;
  long mismatches = 0;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto& gs = gold.sentences[s].words;
    const auto& ps = pred.sentences[s].words;
    if (gs.size() != ps.size()) {
      throw AlignmentError("word count mismatch in sentence " +
                           std::to_string(s + 1) + ": gold has " +
                           std::to_string(gs.size()) + ", prediction has " +
                           std::to_string(ps.size()));
    }
    for (std::size_t w = 0; w < gs.size(); ++w) {
      if (warnings != nullptr && gs[w].raw_word != ps[w].raw_word) {
        *warnings << "warning: raw word mismatch at sentence " << (s + 1)
                  << " word " << (w + 1) << ": '" << gs[w].raw_word
                  << "' vs '" << ps[w].raw_word << "'\n";
      }
      std::vector<std::string> gold_tags, pred_tags;
      for (const auto& tm : gs[w].analysis) gold_tags.push_back(tm.tag);
      for (const auto& tm : ps[w].analysis) pred_tags.push_back(tm.tag);
      if (gold_tags.size() != pred_tags.size()) ++mismatches;
      scores.push_back(score_word(gold_tags, pred_tags));
    }
  }
  return build_report(scores, mismatches);
}

EvalReport evaluate_files(const std::string& gold_path,
                          const std::string& pred_path,
                          std::ostream* warnings) {
  const Corpus gold = load_corpus(gold_path, SegmentationKind::canonical);
  const Corpus pred = load_corpus(pred_path, SegmentationKind::canonical);
  return evaluate_corpora(gold, pred, warnings);
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out.precision(6);
  out << "words           " << word_count << '\n';
  out << "length_mismatch " << mismatch_count << '\n';
  out << "micro_precision " << micro_precision << '\n';
  out << "micro_recall    " << micro_recall << '\n';
  out << "micro_f1        " << micro_f1 << '\n';
  out << "macro_f1        " << macro_f1 << '\n';
  out << "per_tag (intersection/gold/pred precision recall f1)\n";
  for (const auto& [tag, st] : per_tag) {
    out << "  " << tag << " " << st.intersection << "/" << st.gold << "/"
        << st.pred << " " << st.precision << " " << st.recall << " " << st.f1
        << '\n';
  }
  return out.str();
}

std::string EvalReport::to_json_string() const {
  nlohmann::json per_tag_json = nlohmann::json::object();
  for (const auto& [tag, st] : per_tag) {
    per_tag_json[tag] = {{"intersection", st.intersection},
                         {"gold", st.gold},
                         {"pred", st.pred},
                         {"precision", st.precision},
                         {"recall", st.recall},
                         {"f1", st.f1}};
  }
  const nlohmann::json j{{"word_count", word_count},
                         {"mismatch_count", mismatch_count},
                         {"micro_precision", micro_precision},
                         {"micro_recall", micro_recall},
                         {"micro_f1", micro_f1},
                         {"macro_f1", macro_f1},
                         {"per_tag", per_tag_json}};
  return j.dump(2);
}

EvalReport EvalReport::from_json_string(const std::string& text,
                                        const std::string& source) {
  EvalReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    report.word_count = j.at("word_count").get<long>();
    report.mismatch_count = j.at("mismatch_count").get<long>();
    report.micro_precision = j.at("micro_precision").get<double>();
    report.micro_recall = j.at("micro_recall").get<double>();
    report.micro_f1 = j.at("micro_f1").get<double>();
    report.macro_f1 = j.at("macro_f1").get<double>();
    for (const auto& [tag, st] : j.at("per_tag").items()) {
      TagStats stats;
      stats.intersection = st.at("intersection").get<long>();
      stats.gold = st.at("gold").get<long>();
      stats.pred = st.at("pred").get<long>();
      stats.precision = st.at("precision").get<double>();
      stats.recall = st.at("recall").get<double>();
      stats.f1 = st.at("f1").get<double>();
      report.per_tag.emplace(tag, stats);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(source + ": bad evaluation report: " + e.what());
  }
  return report;
}

}  // namespace morphtag
