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
#include <iosfwd>
#include <string>

#include "tensor/autograd.hpp"
#include "tensor/optim.hpp"
#include "tensor/random.hpp"

namespace triformer::vsm {

enum class GeneratorActivation { none, tanh };

// N x m learnable memories, one row per variable, shared by all layers.
struct VariableMemory {
  Parameter memories;

  static VariableMemory random(std::size_t variables, std::size_t width, Rng& rng);
  std::size_t variables() const { return memories.shape()[0]; }
  std::size_t width() const { return memories.shape()[1]; }
};

// Maps an m-dimensional memory to an a x a middle matrix:
// B = reshape(M * weight + bias, a x a), optionally followed by tanh.
struct MiddleGenerator {
  Parameter weight;  // m x a^2
  Parameter bias;    // a^2
  GeneratorActivation activation = GeneratorActivation::none;

  static MiddleGenerator random(const std::string& prefix, std::size_t memory_width,
                                std::size_t middle, Rng& rng,
                                GeneratorActivation activation = GeneratorActivation::none);
  std::size_t middle() const;
};

// Variable-agnostic outer factors for the key and value roles.
struct FactorizedProjection {
  Parameter left_key;     // d x a
  Parameter right_key;    // a x d
  Parameter left_value;   // d x a
  Parameter right_value;  // a x d

  static FactorizedProjection random(const std::string& prefix, std::size_t d, std::size_t a,
                                     Rng& rng);
};

// Full per-variable projections, the heavyweight alternative.
struct NaiveProjectionBank {
  Parameter key;    // N x d x d
  Parameter value;  // N x d x d

  static NaiveProjectionBank random(const std::string& prefix, std::size_t variables,
                                    std::size_t d, Rng& rng);
};

struct ProjectionStacks {
  Var key;    // N x d x d
  Var value;  // N x d x d
};

// Middle matrices for every memory row: memories N x m -> N x a x a.
Var generate_middle(const Var& memories, const MiddleGenerator& generator);

// W_K(i) = L_K G_K(M(i)) R_K and W_V(i) = L_V G_V(M(i)) R_V for every variable.
ProjectionStacks materialize_projections(const Var& memories, const FactorizedProjection& factors,
                                         const MiddleGenerator& key_generator,
                                         const MiddleGenerator& value_generator);

enum class ProjectionMode { agnostic, naive, light };

// Parameters owned by the key/value projection machinery across `layers`
// layers. light counts memories once, generators with bias, and L/R factors.
std::uint64_t parameter_count(ProjectionMode mode, std::uint64_t variables, std::uint64_t d,
                              std::uint64_t memory_width, std::uint64_t middle,
                              std::uint64_t layers);

// CSV with header var_0..var_{m-1} and one row per variable, 17 significant digits.
void write_memories_csv(std::ostream& out, const Tensor& memories);

}  // namespace triformer::vsm
