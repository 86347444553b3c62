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
#include <span>
#include <string>

#include "tensor/autograd.hpp"

namespace triformer {

// Trainable leaf plus its Adam state. Move-only: copying would alias the
// underlying graph node.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor init);

  Parameter(const Parameter&) = delete;
  Parameter& operator=(const Parameter&) = delete;
  Parameter(Parameter&&) noexcept = default;
  Parameter& operator=(Parameter&&) noexcept = default;

  const std::string& name() const noexcept { return name_; }
  const Var& var() const noexcept { return var_; }
  const Tensor& value() const { return var_.value(); }
  const Tensor& grad() const { return var_.grad(); }
  const Shape& shape() const { return var_.shape(); }

  // Overwrites the value in place; shape must match.
  void assign(const Tensor& value);
  void zero_grad() { var_.zero_grad(); }

  const Tensor& first_moment() const noexcept { return m_; }
  const Tensor& second_moment() const noexcept { return v_; }
  std::uint64_t step_count() const noexcept { return step_; }
  void reset_optimizer_state();

 private:
  friend struct AdamOptimizer;
  std::string name_;
  Var var_;
  Tensor m_;
  Tensor v_;
  std::uint64_t step_ = 0;
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam, applied in place. Gradients are left untouched.
void adam_step(std::span<Parameter* const> params, const AdamOptions& options);

}  // namespace triformer
