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

#include "morphtag/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace morphtag {

namespace {

void check_dims(int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    std::ostringstream msg;
    msg << "tensor dimensions must be positive, got " << rows << "x" << cols;
    throw ShapeMismatch(msg.str());
  }
}

[[noreturn]] void shape_error(const char* op, const Tensor& a,
                              const Tensor& b) {
  std::ostringstream msg;
  msg << op << ": incompatible shapes " << a.shape_str() << " vs "
      << b.shape_str();
  throw ShapeMismatch(msg.str());
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
}

// The tape shared by the inputs; null when every input is a constant.
Tape* joint_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (t->tape() == nullptr) continue;
    if (tape != nullptr && tape != t->tape()) {
      throw Error("operands recorded on different tapes");
    }
    tape = t->tape();
  }
  return tape;
}

Tensor finish(Tape* tape, int rows, int cols, std::vector<double> values,
              std::vector<int> parents, Tape::BackwardFn backward) {
  if (tape == nullptr) {
    return Tensor(rows, cols, std::move(values));
  }
  return tape->record({rows, cols}, std::move(values), std::move(parents),
                      std::move(backward));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor::Tensor(int rows, int cols) : shape_{rows, cols} {
  check_dims(rows, cols);
  values_ = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(rows) * cols, 0.0);
}

Tensor::Tensor(int rows, int cols, std::vector<double> values)
    : shape_{rows, cols} {
  check_dims(rows, cols);
  if (values.size() != static_cast<std::size_t>(rows) * cols) {
    std::ostringstream msg;
    msg << "value count " << values.size() << " does not match shape " << rows
        << "x" << cols;
    throw ShapeMismatch(msg.str());
  }
  values_ = std::make_shared<std::vector<double>>(std::move(values));
}

Tensor Tensor::scalar(double v) { return Tensor(1, 1, {v}); }

Tensor Tensor::wrap(int rows, int cols,
                    std::shared_ptr<std::vector<double>> storage) {
  check_dims(rows, cols);
  if (!storage || storage->size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeMismatch("storage size does not match wrapped shape");
  }
  Tensor t;
  t.shape_ = {rows, cols};
  t.values_ = std::move(storage);
  return t;
}

std::string Tensor::shape_str() const {
  return std::to_string(shape_[0]) + "x" + std::to_string(shape_[1]);
}

double Tensor::item() const {
  if (size() != 1) {
    throw NotScalar("item() on tensor of shape " + shape_str());
  }
  return (*values_)[0];
}

Parameter Parameter::make(std::string name, int rows, int cols) {
  check_dims(rows, cols);
  Parameter p;
  p.name = std::move(name);
  p.shape = {rows, cols};
  p.value = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(rows) * cols, 0.0);
  return p;
}

Tensor Tape::leaf(const Parameter& param) {
  return leaf(param.rows(), param.cols(), param.value);
}

Tensor Tape::leaf(int rows, int cols,
                  std::shared_ptr<std::vector<double>> storage) {
  Tensor t = Tensor::wrap(rows, cols, std::move(storage));
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back({t.size(), BackwardFn{}});
  grads_.emplace_back();
  return t;
}

Tensor Tape::record(std::vector<int> shape, std::vector<double> values,
                    std::vector<int> parents, BackwardFn backward) {
  (void)parents;  // topology is implicit in the backward closure
  Tensor t(shape[0], shape[1], std::move(values));
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back({t.size(), std::move(backward)});
  grads_.emplace_back();
  return t;
}

std::vector<double>& Tape::grad_buffer(int node, int size) {
  auto& buf = grads_[static_cast<std::size_t>(node)];
  if (buf.empty()) {
    buf.assign(static_cast<std::size_t>(size), 0.0);
  }
  return buf;
}

const std::vector<double>* Tape::maybe_grad(int node) const {
  const auto& buf = grads_[static_cast<std::size_t>(node)];
  return buf.empty() ? nullptr : &buf;
}

void Tape::backward(const Tensor& loss) {
  if (loss.tape() != this) {
    throw Error("backward: loss tensor is not on this tape");
  }
  if (loss.size() != 1) {
    throw NotScalar("backward requires a scalar loss, got shape " +
                    loss.shape_str());
  }
  for (auto& g : grads_) g.clear();
  grads_[static_cast<std::size_t>(loss.node())] = {1.0};
  for (int i = loss.node(); i >= 0; --i) {
    const auto idx = static_cast<std::size_t>(i);
    if (grads_[idx].empty() || !nodes_[idx].backward) continue;
    nodes_[idx].backward(*this, i);
  }
}

std::vector<double> Tape::grad(const Tensor& t) const {
  if (t.tape() != this) {
    throw Error("grad: tensor is not on this tape");
  }
  const auto& buf = grads_[static_cast<std::size_t>(t.node())];
  if (buf.empty()) {
    return std::vector<double>(static_cast<std::size_t>(t.size()), 0.0);
  }
  return buf;
}

double rand_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double rand_uniform(std::mt19937_64& rng, double bound) {
  return (2.0 * rand_unit(rng) - 1.0) * bound;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const int m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        out[i * n + j] += aip * bv[p * n + j];
      }
    }
  }
  Tape* tape = joint_tape({&a, &b});
  const int pa = a.node(), pb = b.node();
  auto as = a.storage(), bs = b.storage();
  return finish(
      tape, m, n, std::move(out), {pa, pb},
      [=](Tape& t, int self) {
        const auto& dout = *t.maybe_grad(self);
        if (pa >= 0) {
          auto& da = t.grad_buffer(pa, m * k);
          for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) {
              const double d = dout[i * n + j];
              if (d == 0.0) continue;
              for (int p = 0; p < k; ++p) {
                da[i * k + p] += d * (*bs)[p * n + j];
              }
            }
          }
        }
        if (pb >= 0) {
          auto& db = t.grad_buffer(pb, k * n);
          for (int i = 0; i < m; ++i) {
            for (int p = 0; p < k; ++p) {
              const double aip = (*as)[i * k + p];
              if (aip == 0.0) continue;
              for (int j = 0; j < n; ++j) {
                db[p * n + j] += aip * dout[i * n + j];
              }
            }
          }
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  const int n = a.size();
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  for (int i = 0; i < n; ++i) out[i] += bv[i];
  Tape* tape = joint_tape({&a, &b});
  const int pa = a.node(), pb = b.node();
  return finish(tape, a.rows(), a.cols(), std::move(out), {pa, pb},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  if (pa >= 0) {
                    auto& da = t.grad_buffer(pa, n);
                    for (int i = 0; i < n; ++i) da[i] += dout[i];
                  }
                  if (pb >= 0) {
                    auto& db = t.grad_buffer(pb, n);
                    for (int i = 0; i < n; ++i) db[i] += dout[i];
                  }
                });
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
  if (v.rows() != 1 || v.cols() != m.cols()) shape_error("add_rowvec", m, v);
  const int rows = m.rows(), cols = m.cols();
  std::vector<double> out(m.values());
  const auto& vv = v.values();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out[i * cols + j] += vv[j];
  }
  Tape* tape = joint_tape({&m, &v});
  const int pm = m.node(), pv = v.node();
  return finish(tape, rows, cols, std::move(out), {pm, pv},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  if (pm >= 0) {
                    auto& dm = t.grad_buffer(pm, rows * cols);
                    for (int i = 0; i < rows * cols; ++i) dm[i] += dout[i];
                  }
                  if (pv >= 0) {
                    auto& dv = t.grad_buffer(pv, cols);
                    for (int i = 0; i < rows; ++i) {
                      for (int j = 0; j < cols; ++j) {
                        dv[j] += dout[i * cols + j];
                      }
                    }
                  }
                });
}

Tensor add_colvec(const Tensor& m, const Tensor& v) {
  if (v.cols() != 1 || v.rows() != m.rows()) shape_error("add_colvec", m, v);
  const int rows = m.rows(), cols = m.cols();
  std::vector<double> out(m.values());
  const auto& vv = v.values();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out[i * cols + j] += vv[i];
  }
  Tape* tape = joint_tape({&m, &v});
  const int pm = m.node(), pv = v.node();
  return finish(tape, rows, cols, std::move(out), {pm, pv},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  if (pm >= 0) {
                    auto& dm = t.grad_buffer(pm, rows * cols);
                    for (int i = 0; i < rows * cols; ++i) dm[i] += dout[i];
                  }
                  if (pv >= 0) {
                    auto& dv = t.grad_buffer(pv, rows);
                    for (int i = 0; i < rows; ++i) {
                      for (int j = 0; j < cols; ++j) {
                        dv[i] += dout[i * cols + j];
                      }
                    }
                  }
                });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape("sub", a, b);
  const int n = a.size();
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  for (int i = 0; i < n; ++i) out[i] -= bv[i];
  Tape* tape = joint_tape({&a, &b});
  const int pa = a.node(), pb = b.node();
  return finish(tape, a.rows(), a.cols(), std::move(out), {pa, pb},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  if (pa >= 0) {
                    auto& da = t.grad_buffer(pa, n);
                    for (int i = 0; i < n; ++i) da[i] += dout[i];
                  }
                  if (pb >= 0) {
                    auto& db = t.grad_buffer(pb, n);
                    for (int i = 0; i < n; ++i) db[i] -= dout[i];
                  }
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  const int n = a.size();
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  for (int i = 0; i < n; ++i) out[i] *= bv[i];
  Tape* tape = joint_tape({&a, &b});
  const int pa = a.node(), pb = b.node();
  auto as = a.storage(), bs = b.storage();
  return finish(tape, a.rows(), a.cols(), std::move(out), {pa, pb},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  if (pa >= 0) {
                    auto& da = t.grad_buffer(pa, n);
                    for (int i = 0; i < n; ++i) da[i] += dout[i] * (*bs)[i];
                  }
                  if (pb >= 0) {
                    auto& db = t.grad_buffer(pb, n);
                    for (int i = 0; i < n; ++i) db[i] += dout[i] * (*as)[i];
                  }
                });
}

Tensor scale(const Tensor& a, double factor) {
  const int n = a.size();
  std::vector<double> out(a.values());
  for (double& x : out) x *= factor;
  Tape* tape = joint_tape({&a});
  const int pa = a.node();
  return finish(tape, a.rows(), a.cols(), std::move(out), {pa},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  if (pa >= 0) {
                    auto& da = t.grad_buffer(pa, n);
                    for (int i = 0; i < n; ++i) da[i] += factor * dout[i];
                  }
                });
}

Tensor tanh(const Tensor& a) {
  const int n = a.size();
  std::vector<double> out(a.values());
  for (double& x : out) x = std::tanh(x);
  Tape* tape = joint_tape({&a});
  if (tape == nullptr) return Tensor(a.rows(), a.cols(), std::move(out));
  const int pa = a.node();
  auto shared_out = std::make_shared<std::vector<double>>(out);
  return finish(tape, a.rows(), a.cols(), std::move(out), {pa},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& da = t.grad_buffer(pa, n);
                  for (int i = 0; i < n; ++i) {
                    const double y = (*shared_out)[i];
                    da[i] += dout[i] * (1.0 - y * y);
                  }
                });
}

Tensor sigmoid(const Tensor& a) {
  const int n = a.size();
  std::vector<double> out(a.values());
  for (double& x : out) x = stable_sigmoid(x);
  Tape* tape = joint_tape({&a});
  if (tape == nullptr) return Tensor(a.rows(), a.cols(), std::move(out));
  const int pa = a.node();
  auto shared_out = std::make_shared<std::vector<double>>(out);
  return finish(tape, a.rows(), a.cols(), std::move(out), {pa},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& da = t.grad_buffer(pa, n);
                  for (int i = 0; i < n; ++i) {
                    const double y = (*shared_out)[i];
                    da[i] += dout[i] * y * (1.0 - y);
                  }
                });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) shape_error("concat_cols", a, b);
  const int rows = a.rows(), ca = a.cols(), cb = b.cols();
  const int cols = ca + cb;
  std::vector<double> out(static_cast<std::size_t>(rows) * cols);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (int i = 0; i < rows; ++i) {
    std::copy_n(av.begin() + i * ca, ca, out.begin() + i * cols);
    std::copy_n(bv.begin() + i * cb, cb, out.begin() + i * cols + ca);
  }
  Tape* tape = joint_tape({&a, &b});
  const int pa = a.node(), pb = b.node();
  return finish(tape, rows, cols, std::move(out), {pa, pb},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  if (pa >= 0) {
                    auto& da = t.grad_buffer(pa, rows * ca);
                    for (int i = 0; i < rows; ++i) {
                      for (int j = 0; j < ca; ++j) {
                        da[i * ca + j] += dout[i * cols + j];
                      }
                    }
                  }
                  if (pb >= 0) {
                    auto& db = t.grad_buffer(pb, rows * cb);
                    for (int i = 0; i < rows; ++i) {
                      for (int j = 0; j < cb; ++j) {
                        db[i * cb + j] += dout[i * cols + ca + j];
                      }
                    }
                  }
                });
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw Error("stack_rows: no rows");
  const int cols = rows[0].cols();
  for (const auto& r : rows) {
    if (r.rows() != 1 || r.cols() != cols) {
      throw ShapeMismatch("stack_rows: every row must be 1x" +
                          std::to_string(cols) + ", got " + r.shape_str());
    }
  }
  const int n = static_cast<int>(rows.size());
  std::vector<double> out(static_cast<std::size_t>(n) * cols);
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(rows.size());
  for (const auto& r : rows) ptrs.push_back(&r);
  Tape* tape = nullptr;
  std::vector<int> parents(rows.size(), -1);
  for (int i = 0; i < n; ++i) {
    std::copy_n(rows[i].values().begin(), cols, out.begin() + i * cols);
    if (rows[i].tape() != nullptr) {
      if (tape != nullptr && tape != rows[i].tape()) {
        throw Error("operands recorded on different tapes");
      }
      tape = rows[i].tape();
      parents[i] = rows[i].node();
    }
  }
  auto parent_copy = parents;
  return finish(tape, n, cols, std::move(out), std::move(parents),
                [parent_copy, n, cols](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  for (int i = 0; i < n; ++i) {
                    if (parent_copy[i] < 0) continue;
                    auto& dr = t.grad_buffer(parent_copy[i], cols);
                    for (int j = 0; j < cols; ++j) {
                      dr[j] += dout[i * cols + j];
                    }
                  }
                });
}

Tensor row(const Tensor& m, int r) {
  if (r < 0 || r >= m.rows()) {
    throw ShapeMismatch("row index " + std::to_string(r) +
                        " out of range for " + m.shape_str());
  }
  const int cols = m.cols();
  std::vector<double> out(m.values().begin() + r * cols,
                          m.values().begin() + (r + 1) * cols);
  Tape* tape = joint_tape({&m});
  const int pm = m.node();
  const int total = m.size();
  return finish(tape, 1, cols, std::move(out), {pm},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& dm = t.grad_buffer(pm, total);
                  for (int j = 0; j < cols; ++j) dm[r * cols + j] += dout[j];
                });
}

Tensor slice_cols(const Tensor& m, int col0, int len) {
  if (col0 < 0 || len <= 0 || col0 + len > m.cols()) {
    throw ShapeMismatch("slice_cols [" + std::to_string(col0) + ", " +
                        std::to_string(col0 + len) + ") out of range for " +
                        m.shape_str());
  }
  const int rows = m.rows(), cols = m.cols();
  std::vector<double> out(static_cast<std::size_t>(rows) * len);
  const auto& mv = m.values();
  for (int i = 0; i < rows; ++i) {
    std::copy_n(mv.begin() + i * cols + col0, len, out.begin() + i * len);
  }
  Tape* tape = joint_tape({&m});
  const int pm = m.node();
  return finish(tape, rows, len, std::move(out), {pm},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& dm = t.grad_buffer(pm, rows * cols);
                  for (int i = 0; i < rows; ++i) {
                    for (int j = 0; j < len; ++j) {
                      dm[i * cols + col0 + j] += dout[i * len + j];
                    }
                  }
                });
}

Tensor reshape(const Tensor& a, int rows, int cols) {
  check_dims(rows, cols);
  if (rows * cols != a.size()) {
    throw ShapeMismatch("reshape to " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " from " + a.shape_str());
  }
  std::vector<double> out(a.values());
  Tape* tape = joint_tape({&a});
  const int pa = a.node();
  const int n = a.size();
  return finish(tape, rows, cols, std::move(out), {pa},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& da = t.grad_buffer(pa, n);
                  for (int i = 0; i < n; ++i) da[i] += dout[i];
                });
}

Tensor gather(const Tensor& table, const std::vector<int>& ids) {
  if (ids.empty()) throw Error("gather: empty id list");
  const int v = table.rows(), d = table.cols();
  for (int id : ids) {
    if (id < 0 || id >= v) {
      throw Error("gather: id " + std::to_string(id) +
                  " out of range for table " + table.shape_str());
    }
  }
  const int n = static_cast<int>(ids.size());
  std::vector<double> out(static_cast<std::size_t>(n) * d);
  const auto& tv = table.values();
  for (int i = 0; i < n; ++i) {
    std::copy_n(tv.begin() + ids[i] * d, d, out.begin() + i * d);
  }
  Tape* tape = joint_tape({&table});
  const int pt = table.node();
  auto ids_copy = ids;
  return finish(tape, n, d, std::move(out), {pt},
                [pt, ids_copy, v, d, n](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& dt = t.grad_buffer(pt, v * d);
                  for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < d; ++j) {
                      dt[ids_copy[i] * d + j] += dout[i * d + j];
                    }
                  }
                });
}

Tensor sum_all(const Tensor& a) {
  double total = 0.0;
  for (double x : a.values()) total += x;
  Tape* tape = joint_tape({&a});
  const int pa = a.node();
  const int n = a.size();
  return finish(tape, 1, 1, {total}, {pa},
                [=](Tape& t, int self) {
                  const double d = (*t.maybe_grad(self))[0];
                  auto& da = t.grad_buffer(pa, n);
                  for (int i = 0; i < n; ++i) da[i] += d;
                });
}

Tensor sum_axis(const Tensor& a, int axis) {
  if (axis != 0 && axis != 1) throw Error("sum_axis: axis must be 0 or 1");
  const int rows = a.rows(), cols = a.cols();
  const auto& av = a.values();
  Tape* tape = joint_tape({&a});
  const int pa = a.node();
  if (axis == 0) {
    std::vector<double> out(static_cast<std::size_t>(cols), 0.0);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) out[j] += av[i * cols + j];
    }
    return finish(tape, 1, cols, std::move(out), {pa},
                  [=](Tape& t, int self) {
                    const auto& dout = *t.maybe_grad(self);
                    auto& da = t.grad_buffer(pa, rows * cols);
                    for (int i = 0; i < rows; ++i) {
                      for (int j = 0; j < cols; ++j) {
                        da[i * cols + j] += dout[j];
                      }
                    }
                  });
  }
  std::vector<double> out(static_cast<std::size_t>(rows), 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out[i] += av[i * cols + j];
  }
  return finish(tape, rows, 1, std::move(out), {pa},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& da = t.grad_buffer(pa, rows * cols);
                  for (int i = 0; i < rows; ++i) {
                    for (int j = 0; j < cols; ++j) {
                      da[i * cols + j] += dout[i];
                    }
                  }
                });
}

Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng) {
  if (p < 0.0 || p >= 1.0) {
    throw ConfigError("dropout probability must lie in [0, 1), got " +
                      std::to_string(p));
  }
  if (p == 0.0) return a;
  const int n = a.size();
  const double keep_scale = 1.0 / (1.0 - p);
  auto mask = std::make_shared<std::vector<double>>(n);
  for (int i = 0; i < n; ++i) {
    (*mask)[i] = rand_unit(rng) < p ? 0.0 : keep_scale;
  }
  std::vector<double> out(a.values());
  for (int i = 0; i < n; ++i) out[i] *= (*mask)[i];
  Tape* tape = joint_tape({&a});
  const int pa = a.node();
  return finish(tape, a.rows(), a.cols(), std::move(out), {pa},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  if (pa < 0) return;
                  auto& da = t.grad_buffer(pa, n);
                  for (int i = 0; i < n; ++i) da[i] += dout[i] * (*mask)[i];
                });
}

Tensor log_softmax_rows(const Tensor& m) {
  const int rows = m.rows(), cols = m.cols();
  std::vector<double> out(m.values());
  for (int i = 0; i < rows; ++i) {
    double* x = out.data() + static_cast<std::size_t>(i) * cols;
    const double mx = *std::max_element(x, x + cols);
    double total = 0.0;
    for (int j = 0; j < cols; ++j) total += std::exp(x[j] - mx);
    const double lse = mx + std::log(total);
    for (int j = 0; j < cols; ++j) x[j] -= lse;
  }
  Tape* tape = joint_tape({&m});
  if (tape == nullptr) return Tensor(rows, cols, std::move(out));
  const int pm = m.node();
  auto shared_out = std::make_shared<std::vector<double>>(out);
  return finish(tape, rows, cols, std::move(out), {pm},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& dm = t.grad_buffer(pm, rows * cols);
                  for (int i = 0; i < rows; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < cols; ++j) s += dout[i * cols + j];
                    for (int j = 0; j < cols; ++j) {
                      const double soft = std::exp((*shared_out)[i * cols + j]);
                      dm[i * cols + j] += dout[i * cols + j] - soft * s;
                    }
                  }
                });
}

Tensor logsumexp(const Tensor& m, int axis) {
  if (axis != 0 && axis != 1) throw Error("logsumexp: axis must be 0 or 1");
  const int rows = m.rows(), cols = m.cols();
  const auto& mv = m.values();
  Tape* tape = joint_tape({&m});
  const int pm = m.node();
  auto ms = m.storage();
  if (axis == 1) {
    std::vector<double> out(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) {
      const double* x = mv.data() + static_cast<std::size_t>(i) * cols;
      const double mx = *std::max_element(x, x + cols);
      double total = 0.0;
      for (int j = 0; j < cols; ++j) total += std::exp(x[j] - mx);
      out[i] = mx + std::log(total);
    }
    if (tape == nullptr) return Tensor(rows, 1, std::move(out));
    auto shared_out = std::make_shared<std::vector<double>>(out);
    return finish(tape, rows, 1, std::move(out), {pm},
                  [=](Tape& t, int self) {
                    const auto& dout = *t.maybe_grad(self);
                    auto& dm = t.grad_buffer(pm, rows * cols);
                    for (int i = 0; i < rows; ++i) {
                      for (int j = 0; j < cols; ++j) {
                        dm[i * cols + j] +=
                            dout[i] *
                            std::exp((*ms)[i * cols + j] - (*shared_out)[i]);
                      }
                    }
                  });
  }
  std::vector<double> out(static_cast<std::size_t>(cols));
  for (int j = 0; j < cols; ++j) {
    double mx = mv[j];
    for (int i = 1; i < rows; ++i) mx = std::max(mx, mv[i * cols + j]);
    double total = 0.0;
    for (int i = 0; i < rows; ++i) total += std::exp(mv[i * cols + j] - mx);
    out[j] = mx + std::log(total);
  }
  if (tape == nullptr) return Tensor(1, cols, std::move(out));
  auto shared_out = std::make_shared<std::vector<double>>(out);
  return finish(tape, 1, cols, std::move(out), {pm},
                [=](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& dm = t.grad_buffer(pm, rows * cols);
                  for (int i = 0; i < rows; ++i) {
                    for (int j = 0; j < cols; ++j) {
                      dm[i * cols + j] +=
                          dout[j] *
                          std::exp((*ms)[i * cols + j] - (*shared_out)[j]);
                    }
                  }
                });
}

Tensor pick(const Tensor& m, const std::vector<std::pair<int, int>>& indices) {
  if (indices.empty()) throw Error("pick: empty index list");
  const int rows = m.rows(), cols = m.cols();
  for (const auto& [r, c] : indices) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw Error("pick: index (" + std::to_string(r) + ", " +
                  std::to_string(c) + ") out of range for " + m.shape_str());
    }
  }
  const int n = static_cast<int>(indices.size());
  std::vector<double> out(static_cast<std::size_t>(n));
  const auto& mv = m.values();
  for (int i = 0; i < n; ++i) {
    out[i] = mv[indices[i].first * cols + indices[i].second];
  }
  Tape* tape = joint_tape({&m});
  const int pm = m.node();
  auto idx = indices;
  return finish(tape, n, 1, std::move(out), {pm},
                [pm, idx, rows, cols, n](Tape& t, int self) {
                  const auto& dout = *t.maybe_grad(self);
                  auto& dm = t.grad_buffer(pm, rows * cols);
                  for (int i = 0; i < n; ++i) {
                    dm[idx[i].first * cols + idx[i].second] += dout[i];
                  }
                });
}

}  // namespace morphtag
