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

#ifndef MORPHTAG_OPTIM_HPP_
#define MORPHTAG_OPTIM_HPP_

#include <limits>
#include <vector>

#include "morphtag/tensor.hpp"

namespace morphtag {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  double clip_norm = std::numeric_limits<double>::infinity();
};

// Adam with decoupled weight decay and global-norm gradient clipping.
// Per step, in order: the whole gradient set is scaled to clip_norm when its
// global L2 norm exceeds it, weight decay is applied as p -= lr*wd*p, then
// the bias-corrected Adam delta is taken. Any NaN/Inf gradient aborts the
// step before any state is touched (NonFiniteGradient names the parameter).
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig config) : config_(config) {}

  // `grads` is aligned with `params` by index.
  void step(const std::vector<Parameter*>& params,
            const std::vector<std::vector<double>>& grads);

  int step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  AdamConfig config_;
  std::vector<Moments> moments_;
  int step_count_ = 0;
};

// Global L2 norm over a gradient set.
double global_grad_norm(const std::vector<std::vector<double>>& grads);

}  // namespace morphtag

#endif  // MORPHTAG_OPTIM_HPP_
