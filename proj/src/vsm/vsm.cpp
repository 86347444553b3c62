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

#include "vsm/vsm.hpp"

#include <cmath>
#include <ostream>

#include "tensor/error.hpp"

namespace triformer::vsm {

VariableMemory VariableMemory::random(std::size_t variables, std::size_t width, Rng& rng) {
  return VariableMemory{Parameter("vsm.memory", random_normal({variables, width}, 1.0, rng))};
}

MiddleGenerator MiddleGenerator::random(const std::string& prefix, std::size_t memory_width,
                                        std::size_t middle, Rng& rng,
                                        GeneratorActivation activation) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(memory_width));
  MiddleGenerator g;
  g.weight = Parameter(prefix + ".weight",
                       random_uniform({memory_width, middle * middle}, limit, rng));
  g.bias = Parameter(prefix + ".bias", random_uniform({middle * middle}, limit, rng));
  g.activation = activation;
  return g;
}

std::size_t MiddleGenerator::middle() const {
  const auto a = static_cast<std::size_t>(std::llround(std::sqrt(double(bias.shape()[0]))));
  return a;
}

FactorizedProjection FactorizedProjection::random(const std::string& prefix, std::size_t d,
                                                  std::size_t a, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(d + a));
  FactorizedProjection f;
  f.left_key = Parameter(prefix + ".left_key", random_uniform({d, a}, limit, rng));
  f.right_key = Parameter(prefix + ".right_key", random_uniform({a, d}, limit, rng));
  f.left_value = Parameter(prefix + ".left_value", random_uniform({d, a}, limit, rng));
  f.right_value = Parameter(prefix + ".right_value", random_uniform({a, d}, limit, rng));
  return f;
}

NaiveProjectionBank NaiveProjectionBank::random(const std::string& prefix, std::size_t variables,
                                                std::size_t d, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(2 * d));
  NaiveProjectionBank b;
  b.key = Parameter(prefix + ".w_key", random_uniform({variables, d, d}, limit, rng));
  b.value = Parameter(prefix + ".w_value", random_uniform({variables, d, d}, limit, rng));
  return b;
}

Var generate_middle(const Var& memories, const MiddleGenerator& generator) {
  if (memories.shape().size() != 2) {
    throw ShapeError("generate_middle: memories must be N x m, got " +
                     shape_string(memories.shape()));
  }
  const std::size_t n = memories.shape()[0];
  const std::size_t a = generator.middle();
  Var flat = affine(memories, generator.weight.var(), generator.bias.var());
  if (generator.activation == GeneratorActivation::tanh) flat = tanh(flat);
  return reshape(flat, {n, a, a});
}

ProjectionStacks materialize_projections(const Var& memories, const FactorizedProjection& factors,
                                         const MiddleGenerator& key_generator,
                                         const MiddleGenerator& value_generator) {
  const std::size_t n = memories.shape().at(0);
  auto build = [n](const Var& middle, const Parameter& left, const Parameter& right) {
    if (left.shape()[1] != middle.shape()[1] || right.shape()[0] != middle.shape()[2]) {
      throw ShapeError("materialize_projections: factors " + shape_string(left.shape()) + ", " +
                       shape_string(right.shape()) + " do not fit middle " +
                       shape_string(middle.shape()));
    }
    const Var lb = bmm(tile(left.var(), n), middle);  // N x d x a
    return bmm(lb, tile(right.var(), n));              // N x d x d
  };
  return ProjectionStacks{
      build(generate_middle(memories, key_generator), factors.left_key, factors.right_key),
      build(generate_middle(memories, value_generator), factors.left_value, factors.right_value),
  };
}

std::uint64_t parameter_count(ProjectionMode mode, std::uint64_t variables, std::uint64_t d,
                              std::uint64_t memory_width, std::uint64_t middle,
                              std::uint64_t layers) {
  switch (mode) {
    case ProjectionMode::agnostic:
      return layers * 2 * d * d;
    case ProjectionMode::naive:
      return layers * 2 * variables * d * d;
    case ProjectionMode::light: {
      const std::uint64_t generators = 2 * (memory_width * middle * middle + middle * middle);
      const std::uint64_t factors = 2 * (2 * d * middle);
      return variables * memory_width + layers * (generators + factors);
    }
  }
  throw ConfigError("parameter_count: unknown mode");
}

void write_memories_csv(std::ostream& out, const Tensor& memories) {
  if (memories.rank() != 2) {
    throw ShapeError("write_memories_csv: expected N x m, got " + shape_string(memories.shape()));
  }
  const std::size_t n = memories.dim(0);
  const std::size_t m = memories.dim(1);
  for (std::size_t j = 0; j < m; ++j) out << (j ? "," : "") << "var_" << j;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out << (j ? "," : "") << memories.at(i, j);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace triformer::vsm
