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

#include "morphtag/optim.hpp"

#include <cmath>

namespace morphtag {

double global_grad_norm(const std::vector<std::vector<double>>& grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g) sq += x * x;
  }
  return std::sqrt(sq);
}

void AdamOptimizer::step(const std::vector<Parameter*>& params,
                         const std::vector<std::vector<double>>& grads) {
  if (params.size() != grads.size()) {
    throw Error("adam: parameter/gradient count mismatch");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (grads[p].size() != static_cast<std::size_t>(params[p]->size())) {
      throw ShapeMismatch("adam: gradient size mismatch for " +
                          params[p]->name);
    }
    for (double g : grads[p]) {
      if (!std::isfinite(g)) {
        throw NonFiniteGradient("non-finite gradient for parameter " +
                                params[p]->name);
      }
    }
  }
  if (moments_.empty()) {
    moments_.resize(params.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
      moments_[p].m.assign(grads[p].size(), 0.0);
      moments_[p].v.assign(grads[p].size(), 0.0);
    }
  }

  double clip_scale = 1.0;
  if (std::isfinite(config_.clip_norm)) {
    const double norm = global_grad_norm(grads);
    if (norm > config_.clip_norm && norm > 0.0) {
      clip_scale = config_.clip_norm / norm;
    }
  }

  ++step_count_;
  const double bc1 = 1.0 - std::pow(config_.beta1, step_count_);
  const double bc2 = 1.0 - std::pow(config_.beta2, step_count_);

  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& value = *params[p]->value;
    auto& m = moments_[p].m;
    auto& v = moments_[p].v;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grads[p][i] * clip_scale;
      if (config_.weight_decay != 0.0) {
        value[i] -= config_.lr * config_.weight_decay * value[i];
      }
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      value[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

}  // namespace morphtag
