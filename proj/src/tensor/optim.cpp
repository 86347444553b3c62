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

#include "tensor/optim.hpp"

#include <cmath>

#include "tensor/error.hpp"

namespace triformer {

Parameter::Parameter(std::string name, Tensor init)
    : name_(std::move(name)), var_(init, true), m_(init.shape(), 0.0), v_(init.shape(), 0.0) {}

void Parameter::assign(const Tensor& value) {
  if (value.shape() != var_.shape()) {
    throw ShapeError("parameter '" + name_ + "': cannot assign " + shape_string(value.shape()) +
                     " to " + shape_string(var_.shape()));
  }
  var_.value_mut() = value;
}

void Parameter::reset_optimizer_state() {
  m_.fill(0.0);
  v_.fill(0.0);
  step_ = 0;
}

struct AdamOptimizer {
  static void step(Parameter& p, const AdamOptions& o) {
    ++p.step_;
    const double t = static_cast<double>(p.step_);
    const double c1 = 1.0 - std::pow(o.beta1, t);
    const double c2 = 1.0 - std::pow(o.beta2, t);
    Tensor& w = p.var_.value_mut();
    const Tensor& g = p.var_.grad();
    for (std::size_t i = 0; i < w.numel(); ++i) {
      p.m_[i] = o.beta1 * p.m_[i] + (1.0 - o.beta1) * g[i];
      p.v_[i] = o.beta2 * p.v_[i] + (1.0 - o.beta2) * g[i] * g[i];
      const double m_hat = p.m_[i] / c1;
      const double v_hat = p.v_[i] / c2;
      w[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
  }
};

void adam_step(std::span<Parameter* const> params, const AdamOptions& options) {
  for (Parameter* p : params) AdamOptimizer::step(*p, options);
}

}  // namespace triformer
