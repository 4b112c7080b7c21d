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

#ifndef MORPHTAG_TENSOR_HPP_
#define MORPHTAG_TENSOR_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "morphtag/errors.hpp"

namespace morphtag {

class Tape;

// Dense row-major matrix of 64-bit floats; scalars are 1x1. Copies are
// cheap handles onto shared storage. A tensor produced by an op on a tape
// remembers its node so backward() can reach it; tensors with no tape are
// constants and receive no gradient.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols);  // zero-filled constant
  Tensor(int rows, int cols, std::vector<double> values);
  static Tensor scalar(double v);
  static Tensor wrap(int rows, int cols,
                     std::shared_ptr<std::vector<double>> storage);

  int rows() const { return shape_[0]; }
  int cols() const { return shape_[1]; }
  int size() const { return shape_[0] * shape_[1]; }
  const std::vector<int>& shape() const { return shape_; }
  std::string shape_str() const;

  double at(int r, int c) const { return (*values_)[r * shape_[1] + c]; }
  double& at(int r, int c) { return (*values_)[r * shape_[1] + c]; }
  const std::vector<double>& values() const { return *values_; }
  std::vector<double>& values() { return *values_; }
  const std::shared_ptr<std::vector<double>>& storage() const {
    return values_;
  }

  // Value of a 1x1 tensor.
  double item() const;

  Tape* tape() const { return tape_; }
  int node() const { return node_; }
  bool on_tape() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  std::vector<int> shape_{0, 0};
  std::shared_ptr<std::vector<double>> values_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// A named, trainable weight. Storage is shared with the tensors that bind
// it during a forward pass, so optimizer updates are visible to the next
// pass without copying.
struct Parameter {
  std::string name;
  std::vector<int> shape{0, 0};
  std::shared_ptr<std::vector<double>> value;

  static Parameter make(std::string name, int rows, int cols);
  int rows() const { return shape[0]; }
  int cols() const { return shape[1]; }
  int size() const { return shape[0] * shape[1]; }
};

// Gradient tape. Ops append one node each in execution order; backward()
// walks the nodes in exact reverse, accumulating gradients. A tape and the
// tensors recorded on it belong to a single thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers a parameter (or input) as a differentiable leaf.
  Tensor leaf(const Parameter& param);
  Tensor leaf(int rows, int cols, std::shared_ptr<std::vector<double>> storage);

  // Walks the tape backwards from a scalar loss, filling gradients for
  // every node that contributed to it. Throws NotScalar otherwise.
  void backward(const Tensor& loss);

  // Gradient of the last backward() w.r.t. a tensor on this tape; zeros if
  // the tensor did not contribute to the loss.
  std::vector<double> grad(const Tensor& t) const;

  std::size_t node_count() const { return nodes_.size(); }

  // --- used by op implementations ---
  using BackwardFn = std::function<void(Tape&, int self)>;
  Tensor record(std::vector<int> shape, std::vector<double> values,
                std::vector<int> parents, BackwardFn backward);
  // Accumulation buffer for a node, zero-initialised on first use.
  std::vector<double>& grad_buffer(int node, int size);
  const std::vector<double>* maybe_grad(int node) const;

 private:
  struct Node {
    int size = 0;
    BackwardFn backward;  // empty for leaves
  };
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
};

// Uniform draw in [0, 1) built directly from the raw 64-bit stream so the
// sequence is identical across standard libraries.
double rand_unit(std::mt19937_64& rng);

// Uniform draw in [-bound, bound].
double rand_uniform(std::mt19937_64& rng, double bound);

// --- differentiable operations -------------------------------------------
// Each op checks shapes (ShapeMismatch lists both), computes the result and
// records a backward rule when any input lives on a tape.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor add_rowvec(const Tensor& m, const Tensor& v);  // v: 1 x cols
Tensor add_colvec(const Tensor& m, const Tensor& v);  // v: rows x 1
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double factor);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor stack_rows(const std::vector<Tensor>& rows);
Tensor row(const Tensor& m, int r);
Tensor slice_cols(const Tensor& m, int col0, int len);
Tensor reshape(const Tensor& a, int rows, int cols);
Tensor gather(const Tensor& table, const std::vector<int>& ids);
Tensor sum_all(const Tensor& a);
Tensor sum_axis(const Tensor& a, int axis);  // 0: 1 x cols, 1: rows x 1

// Inverted dropout: keeps an entry with probability 1-p and scales it by
// 1/(1-p), so inference needs no rescaling. p = 0 is the identity. Only
// called in train mode; inference simply skips the op.
Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng);

Tensor log_softmax_rows(const Tensor& m);
Tensor logsumexp(const Tensor& m, int axis);

// Picks entries m[r][c] for each (r, c), as a k x 1 tensor.
Tensor pick(const Tensor& m, const std::vector<std::pair<int, int>>& indices);

}  // namespace morphtag

#endif  // MORPHTAG_TENSOR_HPP_
