// Copyright 2026 The Triformer Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tensor/tensor.hpp"

namespace triformer {

// One vertex of the reverse-mode graph. Leaves are parameters or constants;
// interior nodes own a closure that pushes their gradient into their inputs.
struct Node {
  Tensor value;
  Tensor grad;
  bool has_grad = false;
  bool requires_grad = false;
  bool leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_buffer();
};

// Shared handle to a graph node. Copies alias the same node.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  Tensor& value_mut() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->has_grad; }

  // Zeros of the value's shape when no gradient has been accumulated yet.
  const Tensor& grad() const { return node_->grad_buffer(); }
  void zero_grad();

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

inline Var constant(Tensor value) { return Var(std::move(value), false); }

// Accumulates d(loss)/d(leaf) into every reachable leaf that requires a
// gradient. Interior gradients are reset on every call; leaf gradients add up
// until zeroed by the caller.
void backward(const Var& loss);

// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled() noexcept;

// Counts forward floating-point operations issued on this thread while alive.
// Nested counters each see the work done inside their own scope.
class FlopCounter {
 public:
  FlopCounter();
  ~FlopCounter();
  FlopCounter(const FlopCounter&) = delete;
  FlopCounter& operator=(const FlopCounter&) = delete;

  std::uint64_t count() const noexcept { return count_; }

 private:
  friend void count_flops(std::uint64_t n) noexcept;
  std::uint64_t count_ = 0;
  FlopCounter* parent_;
};

void count_flops(std::uint64_t n) noexcept;

enum class Transpose : bool { no = false, yes = true };

// C = A * op(B) for rank-2 operands; op(B) = B^T when transpose_b.
Var matmul(const Var& a, const Var& b, Transpose transpose_b = Transpose::no);
// Batched matmul over the leading axis: [n x p x q] * [n x q x r].
Var bmm(const Var& a, const Var& b, Transpose transpose_b = Transpose::no);

enum class Elementwise { add, sub, mul, tanh, sigmoid };

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var elementwise(Elementwise kind, const Var& a, const Var& b = Var());

// Softmax over the last axis with max subtraction.
Var softmax_rows(const Var& a);

Var reshape(const Var& a, Shape shape);
// Elements [begin, end) along `axis`.
Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end);
Var concat(std::span<const Var> parts, std::size_t axis);
// Stacks `count` copies of `a` along a new leading axis.
Var tile(const Var& a, std::size_t count);

// x[rows x in] * weight[in x out] + bias[out] repeated over rows.
Var affine(const Var& x, const Var& weight, const Var& bias);

enum class Reduction { mean, mse, mae };

Var mean(const Var& a);
Var mse(const Var& prediction, const Var& target);
// Metric-only: the result does not participate in differentiation.
Var mae(const Var& prediction, const Var& target);
Var reduce_and_loss(Reduction kind, const Var& prediction, const Var& target = Var());

double mse_value(const Tensor& prediction, const Tensor& target);
double mae_value(const Tensor& prediction, const Tensor& target);

namespace detail {
// C[p x r] (+)= op(A)[p x q] * op(B)[q x r]. Transposed operands are stored
// with their two axes swapped. Summation order over q is ascending.
void gemm(bool transpose_a, bool transpose_b, std::size_t p, std::size_t q, std::size_t r,
          const double* a, const double* b, double* c, bool accumulate);
}  // namespace detail

}  // namespace triformer
