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

#include "morphtag/crf.hpp"
#include "test_util.hpp"

using namespace morphtag;
using morphtag::testing::enumerate_crf;
using morphtag::testing::random_tensor;

TEST_CASE("log partition of an all-zero 2x2 instance is ln 4") {
  const Tensor e(2, 2);
  const Tensor trans(2, 2);
  const Tensor start(1, 2);
  const Tensor end(1, 2);
  CHECK(crf_log_partition(e, trans, start, end).item() ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("L=1 log partition has the closed form") {
  std::mt19937_64 rng(2);
  const Tensor e = random_tensor(1, 5, rng);
  const Tensor trans = random_tensor(5, 5, rng);
  const Tensor start = random_tensor(1, 5, rng);
  const Tensor end = random_tensor(1, 5, rng);
  const double log_z = crf_log_partition(e, trans, start, end).item();
  double mx = -1e300;
  for (int j = 0; j < 5; ++j) {
    mx = std::max(mx, start.at(0, j) + e.at(0, j) + end.at(0, j));
  }
  double total = 0.0;
  for (int j = 0; j < 5; ++j) {
    total += std::exp(start.at(0, j) + e.at(0, j) + end.at(0, j) - mx);
  }
  CHECK(log_z == doctest::Approx(mx + std::log(total)).epsilon(1e-12));
}

TEST_CASE("all-zero parameters score every path zero") {
  const Tensor e(3, 4);
  const Tensor trans(4, 4);
  const Tensor start(1, 4);
  const Tensor end(1, 4);
  CHECK(crf_path_score(e, trans, start, end, {0, 3, 1}).item() == 0.0);
  CHECK(crf_path_score(e, trans, start, end, {2, 2, 2}).item() == 0.0);
}

TEST_CASE("log partition and viterbi match exhaustive enumeration") {
  std::mt19937_64 rng(1234);
  for (int iter = 0; iter < 60; ++iter) {
    const int len = 1 + static_cast<int>(rng() % 5);
    const int t = 1 + static_cast<int>(rng() % 6);
    const Tensor e = random_tensor(len, t, rng);
    const Tensor trans = random_tensor(t, t, rng);
    const Tensor start = random_tensor(1, t, rng);
    const Tensor end = random_tensor(1, t, rng);

    const auto oracle = enumerate_crf(e, trans, start, end);
    const double log_z = crf_log_partition(e, trans, start, end).item();
    CHECK(std::abs(log_z - oracle.log_z) < 1e-8);

    const auto vit = viterbi_decode(e, trans, start, end);
    CHECK(std::abs(vit.score - oracle.best_score) < 1e-8);
    CHECK(vit.tags == oracle.best_path);
    CHECK(vit.score <= log_z + 1e-12);  // max <= logsumexp

    // the returned path attains the reported score
    CHECK(std::abs(morphtag::testing::path_score_raw(e, trans, start, end,
                                                     vit.tags) -
                   vit.score) < 1e-9);
  }
}

TEST_CASE("path probabilities normalise to one") {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 20; ++iter) {
    const int len = 1 + static_cast<int>(rng() % 4);
    const int t = 2 + static_cast<int>(rng() % 4);
    const Tensor e = random_tensor(len, t, rng);
    const Tensor trans = random_tensor(t, t, rng);
    const Tensor start = random_tensor(1, t, rng);
    const Tensor end = random_tensor(1, t, rng);
    const double log_z = crf_log_partition(e, trans, start, end).item();
    double total = 0.0;
    for (double s : enumerate_crf(e, trans, start, end).path_scores) {
      total += std::exp(s - log_z);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("degenerate single-tag chain: path score equals log partition") {
  std::mt19937_64 rng(5);
  const Tensor e = random_tensor(4, 1, rng);
  const Tensor trans = random_tensor(1, 1, rng);
  const Tensor start = random_tensor(1, 1, rng);
  const Tensor end = random_tensor(1, 1, rng);
  const double log_z = crf_log_partition(e, trans, start, end).item();
  const double path =
      crf_path_score(e, trans, start, end, {0, 0, 0, 0}).item();
  CHECK(path == doctest::Approx(log_z).epsilon(1e-12));
}

TEST_CASE("zero transitions reduce viterbi to per-position argmax") {
  std::mt19937_64 rng(6);
  const Tensor e = random_tensor(5, 4, rng);
  const Tensor zeros(4, 4);
  const Tensor zstart(1, 4);
  const Tensor zend(1, 4);
  const auto vit = viterbi_decode(e, zeros, zstart, zend);
  for (int l = 0; l < 5; ++l) {
    int arg = 0;
    for (int j = 1; j < 4; ++j) {
      if (e.at(l, j) > e.at(l, arg)) arg = j;
    }
    CHECK(vit.tags[static_cast<std::size_t>(l)] == arg);
  }
}

TEST_CASE("viterbi ties break toward the lowest tag id") {
  // all scores zero: every path ties, the all-zeros path must win
  const Tensor e(3, 3);
  const Tensor trans(3, 3);
  const Tensor start(1, 3);
  const Tensor end(1, 3);
  const auto vit = viterbi_decode(e, trans, start, end);
  CHECK(vit.tags == std::vector<int>{0, 0, 0});
  CHECK(vit.score == 0.0);
}

TEST_CASE("uniform transition shift moves the score, not the path") {
  std::mt19937_64 rng(8);
  const int len = 4, t = 5;
  const Tensor e = random_tensor(len, t, rng);
  const Tensor trans = random_tensor(t, t, rng);
  const Tensor start = random_tensor(1, t, rng);
  const Tensor end = random_tensor(1, t, rng);
  const auto base = viterbi_decode(e, trans, start, end);

  const double c = 2.75;
  Tensor shifted(t, t, trans.values());
  for (double& v : shifted.values()) v += c;
  const auto moved = viterbi_decode(e, shifted, start, end);
  CHECK(moved.tags == base.tags);
  CHECK(moved.score ==
        doctest::Approx(base.score + (len - 1) * c).epsilon(1e-12));
}

TEST_CASE("crf quantities differentiate correctly") {
  std::mt19937_64 rng(31);
  Parameter e = Parameter::make("emissions", 4, 3);
  Parameter trans = Parameter::make("transitions", 3, 3);
  Parameter start = Parameter::make("start", 1, 3);
  Parameter end = Parameter::make("end", 1, 3);
  for (Parameter* p : {&e, &trans, &start, &end}) {
    for (double& v : *p->value) v = rand_uniform(rng, 1.0);
  }
  const std::vector<int> gold{0, 2, 1, 1};

  auto build = [&](Tape& tape, std::vector<Tensor>& leaves) {
    leaves = {tape.leaf(e), tape.leaf(trans), tape.leaf(start), tape.leaf(end)};
    const Tensor log_z =
        crf_log_partition(leaves[0], leaves[1], leaves[2], leaves[3]);
    const Tensor path =
        crf_path_score(leaves[0], leaves[1], leaves[2], leaves[3], gold);
    return sub(log_z, path);  // the CRF NLL of the gold path
  };
  auto loss_value = [&]() {
    Tape tape;
    std::vector<Tensor> leaves;
    return build(tape, leaves).item();
  };

  Tape tape;
  std::vector<Tensor> leaves;
  const Tensor loss = build(tape, leaves);
  tape.backward(loss);
  std::vector<std::vector<double>> grads;
  for (const auto& leaf : leaves) grads.push_back(tape.grad(leaf));
  const auto report = morphtag::testing::finite_difference_check(
      {&e, &trans, &start, &end}, grads, loss_value);
  CAPTURE(report.worst_param);
  CHECK(report.max_rel_error < 1e-4);
}
