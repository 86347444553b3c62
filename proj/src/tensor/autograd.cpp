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

#include "tensor/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <utility>

#include "tensor/error.hpp"

namespace triformer {

namespace {

thread_local bool g_grad_enabled = true;
thread_local FlopCounter* g_flop_counter = nullptr;

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_rank(const char* op, const Var& a, std::size_t rank) {
  if (a.shape().size() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(a.shape()));
  }
}

using BackwardFn = std::function<void(Node&)>;

Var make_result(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->leaf = false;
  node->op = op;
  bool needs = false;
  if (g_grad_enabled) {
    for (const Var& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (const Var& in : inputs) node->inputs.push_back(in.node_ptr());
    node->backward_fn = std::move(fn);
  }
  return Var(std::move(node));
}

// Input k of `self` when it takes part in differentiation, else nullptr.
Tensor* grad_of(Node& self, std::size_t k) {
  Node& in = *self.inputs[k];
  return in.requires_grad ? &in.grad_buffer() : nullptr;
}

// Strides for slicing/concatenation along one axis.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Tensor& Node::grad_buffer() {
  if (!has_grad) {
    grad = Tensor(value.shape(), 0.0);
    has_grad = true;
  }
  return grad;
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

void Var::zero_grad() {
  if (node_->has_grad) node_->grad.fill(0.0);
}

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

FlopCounter::FlopCounter() : parent_(g_flop_counter) { g_flop_counter = this; }
FlopCounter::~FlopCounter() { g_flop_counter = parent_; }

void count_flops(std::uint64_t n) noexcept {
  for (FlopCounter* c = g_flop_counter; c != nullptr; c = c->parent_) c->count_ += n;
}

void backward(const Var& loss) {
  if (!loss) throw ShapeError("backward: empty loss");
  if (loss.value().numel() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " + shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS following inputs in declaration order, so the
  // traversal sequence depends only on graph structure.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node(), 0);
  visited.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Leaves collect this pass in a fresh buffer and fold it into their
  // stored gradient with one addition per element, so repeated passes
  // accumulate exactly.
  std::vector<std::pair<Node*, Tensor>> carried;
  for (Node* n : order) {
    if (n->leaf && n->has_grad) carried.emplace_back(n, std::move(n->grad));
    n->has_grad = false;
  }
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->has_grad) n->backward_fn(*n);
  }
  for (auto& [n, previous] : carried) {
    if (!n->has_grad) {
      n->grad = std::move(previous);
      n->has_grad = true;
      continue;
    }
    for (std::size_t i = 0; i < previous.numel(); ++i) previous[i] += n->grad[i];
    n->grad = std::move(previous);
  }
}

namespace detail {

void gemm(bool ta, bool tb, std::size_t p, std::size_t q, std::size_t r, const double* a,
          const double* b, double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + p * r, 0.0);
  if (!ta && !tb) {
    for (std::size_t i = 0; i < p; ++i) {
      double* crow = c + i * r;
      const double* arow = a + i * q;
      for (std::size_t k = 0; k < q; ++k) {
        const double aik = arow[k];
        const double* brow = b + k * r;
        for (std::size_t j = 0; j < r; ++j) crow[j] += aik * brow[j];
      }
    }
  } else if (!ta && tb) {
    for (std::size_t i = 0; i < p; ++i) {
      const double* arow = a + i * q;
      double* crow = c + i * r;
      for (std::size_t j = 0; j < r; ++j) {
        const double* brow = b + j * q;
        double s = 0.0;
        for (std::size_t k = 0; k < q; ++k) s += arow[k] * brow[k];
        crow[j] += s;
      }
    }
  } else if (ta && !tb) {
    for (std::size_t k = 0; k < q; ++k) {
      const double* arow = a + k * p;
      const double* brow = b + k * r;
      for (std::size_t i = 0; i < p; ++i) {
        const double aki = arow[i];
        double* crow = c + i * r;
        for (std::size_t j = 0; j < r; ++j) crow[j] += aki * brow[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < q; ++k) s += a[k * p + i] * b[j * q + k];
        c[i * r + j] += s;
      }
    }
  }
}

}  // namespace detail

Var matmul(const Var& a, const Var& b, Transpose transpose_b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const bool tb = transpose_b == Transpose::yes;
  const std::size_t p = a.shape()[0];
  const std::size_t q = a.shape()[1];
  const std::size_t bq = tb ? b.shape()[1] : b.shape()[0];
  const std::size_t r = tb ? b.shape()[0] : b.shape()[1];
  if (q != bq) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_string(a.shape()) +
                     (tb ? " * T" : " * ") + shape_string(b.shape()));
  }
  Tensor out({p, r});
  detail::gemm(false, tb, p, q, r, a.value().raw(), b.value().raw(), out.raw(), false);
  count_flops(2ull * p * q * r);
  return make_result("matmul", std::move(out), {a, b}, [p, q, r, tb](Node& self) {
    const double* g = self.grad.raw();
    const double* av = self.inputs[0]->value.raw();
    const double* bv = self.inputs[1]->value.raw();
    if (Tensor* ga = grad_of(self, 0)) {
      detail::gemm(false, !tb, p, r, q, g, bv, ga->raw(), true);
    }
    if (Tensor* gb = grad_of(self, 1)) {
      if (tb) {
        detail::gemm(true, false, r, p, q, g, av, gb->raw(), true);
      } else {
        detail::gemm(true, false, q, p, r, av, g, gb->raw(), true);
      }
    }
  });
}

Var bmm(const Var& a, const Var& b, Transpose transpose_b) {
  require_rank("bmm", a, 3);
  require_rank("bmm", b, 3);
  const bool tb = transpose_b == Transpose::yes;
  const std::size_t n = a.shape()[0];
  const std::size_t p = a.shape()[1];
  const std::size_t q = a.shape()[2];
  const std::size_t bq = tb ? b.shape()[2] : b.shape()[1];
  const std::size_t r = tb ? b.shape()[1] : b.shape()[2];
  if (b.shape()[0] != n || q != bq) {
    throw ShapeError("bmm: incompatible operands " + shape_string(a.shape()) +
                     (tb ? " * T" : " * ") + shape_string(b.shape()));
  }
  Tensor out({n, p, r});
  for (std::size_t s = 0; s < n; ++s) {
    detail::gemm(false, tb, p, q, r, a.value().raw() + s * p * q, b.value().raw() + s * q * r,
                 out.raw() + s * p * r, false);
  }
  count_flops(2ull * n * p * q * r);
  return make_result("bmm", std::move(out), {a, b}, [n, p, q, r, tb](Node& self) {
    const double* g = self.grad.raw();
    const double* av = self.inputs[0]->value.raw();
    const double* bv = self.inputs[1]->value.raw();
    Tensor* ga = grad_of(self, 0);
    Tensor* gb = grad_of(self, 1);
    for (std::size_t s = 0; s < n; ++s) {
      const double* gs = g + s * p * r;
      const double* as = av + s * p * q;
      const double* bs = bv + s * q * r;
      if (ga) detail::gemm(false, !tb, p, r, q, gs, bs, ga->raw() + s * p * q, true);
      if (gb) {
        if (tb) {
          detail::gemm(true, false, r, p, q, gs, as, gb->raw() + s * q * r, true);
        } else {
          detail::gemm(true, false, q, p, r, as, gs, gb->raw() + s * q * r, true);
        }
      }
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  Tensor out = a.value();
  const double* bv = b.value().raw();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
  count_flops(out.numel());
  return make_result("add", std::move(out), {a, b}, [](Node& self) {
    const std::size_t n = self.grad.numel();
    for (std::size_t k = 0; k < 2; ++k) {
      if (Tensor* gk = grad_of(self, k)) {
        for (std::size_t i = 0; i < n; ++i) (*gk)[i] += self.grad[i];
      }
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  Tensor out = a.value();
  const double* bv = b.value().raw();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= bv[i];
  count_flops(out.numel());
  return make_result("sub", std::move(out), {a, b}, [](Node& self) {
    const std::size_t n = self.grad.numel();
    if (Tensor* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < n; ++i) (*ga)[i] += self.grad[i];
    }
    if (Tensor* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < n; ++i) (*gb)[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape("mul", a, b);
  Tensor out = a.value();
  const double* bv = b.value().raw();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
  count_flops(out.numel());
  return make_result("mul", std::move(out), {a, b}, [](Node& self) {
    const std::size_t n = self.grad.numel();
    const Tensor& av = self.inputs[0]->value;
    const Tensor& bv = self.inputs[1]->value;
    if (Tensor* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < n; ++i) (*ga)[i] += self.grad[i] * bv[i];
    }
    if (Tensor* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < n; ++i) (*gb)[i] += self.grad[i] * av[i];
    }
  });
}

Var scale(const Var& a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  count_flops(out.numel());
  return make_result("scale", std::move(out), {a}, [factor](Node& self) {
    if (Tensor* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.numel(); ++i) (*ga)[i] += self.grad[i] * factor;
    }
  });
}

Var tanh(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = std::tanh(v);
  count_flops(out.numel());
  return make_result("tanh", std::move(out), {a}, [](Node& self) {
    if (Tensor* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.numel(); ++i) {
        const double y = self.value[i];
        (*ga)[i] += self.grad[i] * (1.0 - y * y);
      }
    }
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.data()) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  count_flops(out.numel());
  return make_result("sigmoid", std::move(out), {a}, [](Node& self) {
    if (Tensor* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.numel(); ++i) {
        const double y = self.value[i];
        (*ga)[i] += self.grad[i] * y * (1.0 - y);
      }
    }
  });
}

Var elementwise(Elementwise kind, const Var& a, const Var& b) {
  switch (kind) {
    case Elementwise::add: return add(a, b);
    case Elementwise::sub: return sub(a, b);
    case Elementwise::mul: return mul(a, b);
    case Elementwise::tanh: return tanh(a);
    case Elementwise::sigmoid: return sigmoid(a);
  }
  throw ConfigError("elementwise: unknown kind");
}

Var softmax_rows(const Var& a) {
  if (a.shape().empty()) throw ShapeError("softmax_rows: scalar input");
  const std::size_t k = a.shape().back();
  const std::size_t rows = a.value().numel() / k;
  Tensor out = a.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = out.raw() + r * k;
    const double mx = *std::max_element(row, row + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < k; ++j) row[j] *= inv;
  }
  count_flops(4ull * rows * k);
  return make_result("softmax_rows", std::move(out), {a}, [rows, k](Node& self) {
    Tensor* ga = grad_of(self, 0);
    if (!ga) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.raw() + r * k;
      const double* g = self.grad.raw() + r * k;
      double dot = 0.0;
      for (std::size_t j = 0; j < k; ++j) dot += g[j] * y[j];
      double* gx = ga->raw() + r * k;
      for (std::size_t j = 0; j < k; ++j) gx[j] += y[j] * (g[j] - dot);
    }
  });
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return make_result("reshape", std::move(out), {a}, [](Node& self) {
    if (Tensor* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.numel(); ++i) (*ga)[i] += self.grad[i];
    }
  });
}

Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& in_shape = a.shape();
  if (axis >= in_shape.size() || begin >= end || end > in_shape[axis]) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") on axis " + std::to_string(axis) + " of " + shape_string(in_shape));
  }
  const AxisSplit s = split_axis(in_shape, axis);
  const std::size_t width = end - begin;
  Shape out_shape = in_shape;
  out_shape[axis] = width;
  Tensor out(out_shape);
  const double* src = a.value().raw();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(src + (o * s.extent + begin) * s.inner, width * s.inner,
                out.raw() + o * width * s.inner);
  }
  return make_result("slice", std::move(out), {a}, [s, begin, width](Node& self) {
    Tensor* ga = grad_of(self, 0);
    if (!ga) return;
    for (std::size_t o = 0; o < s.outer; ++o) {
      const double* g = self.grad.raw() + o * width * s.inner;
      double* dst = ga->raw() + (o * s.extent + begin) * s.inner;
      for (std::size_t i = 0; i < width * s.inner; ++i) dst[i] += g[i];
    }
  });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw ShapeError("concat: axis out of range for " + shape_string(first));
  std::size_t total = 0;
  for (const Var& p : parts) {
    Shape a = p.shape();
    Shape b = first;
    if (a.size() != b.size()) throw ShapeError("concat: rank mismatch");
    total += a[axis];
    a[axis] = b[axis] = 0;
    if (a != b) {
      throw ShapeError("concat: incompatible " + shape_string(p.shape()) + " vs " +
                       shape_string(first));
    }
  }
  Shape out_shape = first;
  out_shape[axis] = total;
  Tensor out(out_shape);
  const AxisSplit s = split_axis(out_shape, axis);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    offsets.push_back(off);
    const std::size_t w = p.shape()[axis];
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(p.value().raw() + o * w * s.inner, w * s.inner,
                  out.raw() + (o * total + off) * s.inner);
    }
    off += w;
  }

  // make_result takes an initializer_list; build the node by hand for n-ary input.
  if (!out.all_finite()) throw NumericError("non-finite value produced by concat");
  auto node = std::make_shared<Node>();
  node->value = std::move(out);
  node->leaf = false;
  node->op = "concat";
  bool needs = false;
  if (g_grad_enabled) {
    for (const Var& p : parts) needs = needs || p.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const Var& p : parts) node->inputs.push_back(p.node_ptr());
    node->backward_fn = [s, total, offsets, axis](Node& self) {
      for (std::size_t k = 0; k < self.inputs.size(); ++k) {
        Tensor* gk = grad_of(self, k);
        if (!gk) continue;
        const std::size_t w = self.inputs[k]->value.shape()[axis];
        for (std::size_t o = 0; o < s.outer; ++o) {
          const double* g = self.grad.raw() + (o * total + offsets[k]) * s.inner;
          double* dst = gk->raw() + o * w * s.inner;
          for (std::size_t i = 0; i < w * s.inner; ++i) dst[i] += g[i];
        }
      }
    };
  }
  return Var(std::move(node));
}

Var tile(const Var& a, std::size_t count) {
  if (count == 0) throw ShapeError("tile: count must be positive");
  Shape out_shape;
  out_shape.reserve(a.shape().size() + 1);
  out_shape.push_back(count);
  out_shape.insert(out_shape.end(), a.shape().begin(), a.shape().end());
  Tensor out(out_shape);
  const std::size_t n = a.value().numel();
  for (std::size_t c = 0; c < count; ++c) std::copy_n(a.value().raw(), n, out.raw() + c * n);
  return make_result("tile", std::move(out), {a}, [count, n](Node& self) {
    Tensor* ga = grad_of(self, 0);
    if (!ga) return;
    for (std::size_t c = 0; c < count; ++c) {
      const double* g = self.grad.raw() + c * n;
      for (std::size_t i = 0; i < n; ++i) (*ga)[i] += g[i];
    }
  });
}

Var affine(const Var& x, const Var& weight, const Var& bias) {
  Var y = matmul(x, weight);
  return add(y, tile(bias, x.shape()[0]));
}

Var mean(const Var& a) {
  const std::size_t n = a.value().numel();
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  count_flops(n);
  return make_result("mean", Tensor::scalar(s / static_cast<double>(n)), {a}, [n](Node& self) {
    if (Tensor* ga = grad_of(self, 0)) {
      const double g = self.grad[0] / static_cast<double>(n);
      for (double& v : ga->data()) v += g;
    }
  });
}

double mse_value(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw ShapeError("mse: shape mismatch " + shape_string(prediction.shape()) + " vs " +
                     shape_string(target.shape()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < prediction.numel(); ++i) {
    const double e = prediction[i] - target[i];
    s += e * e;
  }
  return s / static_cast<double>(prediction.numel());
}

double mae_value(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw ShapeError("mae: shape mismatch " + shape_string(prediction.shape()) + " vs " +
                     shape_string(target.shape()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < prediction.numel(); ++i) s += std::abs(prediction[i] - target[i]);
  return s / static_cast<double>(prediction.numel());
}

Var mse(const Var& prediction, const Var& target) {
  const double value = mse_value(prediction.value(), target.value());
  count_flops(3ull * prediction.value().numel());
  return make_result("mse", Tensor::scalar(value), {prediction, target}, [](Node& self) {
    const Tensor& p = self.inputs[0]->value;
    const Tensor& t = self.inputs[1]->value;
    const double k = 2.0 * self.grad[0] / static_cast<double>(p.numel());
    Tensor* gp = grad_of(self, 0);
    Tensor* gt = grad_of(self, 1);
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const double e = k * (p[i] - t[i]);
      if (gp) (*gp)[i] += e;
      if (gt) (*gt)[i] -= e;
    }
  });
}

Var mae(const Var& prediction, const Var& target) {
  return constant(Tensor::scalar(mae_value(prediction.value(), target.value())));
}

Var reduce_and_loss(Reduction kind, const Var& prediction, const Var& target) {
  switch (kind) {
    case Reduction::mean: return mean(prediction);
    case Reduction::mse: return mse(prediction, target);
    case Reduction::mae: return mae(prediction, target);
  }
  throw ConfigError("reduce_and_loss: unknown kind");
}

}  // namespace triformer
