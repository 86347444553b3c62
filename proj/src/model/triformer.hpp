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

#include <optional>
#include <string>
#include <vector>

#include "attention/attention.hpp"
#include "model/config.hpp"
#include "tensor/autograd.hpp"
#include "tensor/optim.hpp"
#include "vsm/vsm.hpp"

namespace triformer {

struct Checkpoint;

// Triangular stack of patch-attention layers with per-layer aggregation and
// a shared fully connected predictor.
//
// Inputs are B x N x H windows (or a single N x H window); outputs are
// B x N x F (or N x F). Internally every (window, variable) pair is one row,
// R = B * N, and variable-specific parameters are tiled over the batch.
class Triformer {
 public:
  explicit Triformer(TriformerConfig config);

  Triformer(const Triformer&) = delete;
  Triformer& operator=(const Triformer&) = delete;
  Triformer(Triformer&&) noexcept = default;
  Triformer& operator=(Triformer&&) noexcept = default;

  const TriformerConfig& config() const noexcept { return config_; }
  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }

  Var forward(const Tensor& x, attention::AttentionStats* stats = nullptr) const;
  Var forward(const Var& x, attention::AttentionStats* stats = nullptr) const;
  // Forward without recording a graph.
  Tensor predict(const Tensor& x) const;

  // Building blocks, exposed for composition and testing.
  static Tensor positional_table(std::size_t length, std::size_t d);
  Var embed(const Var& rows) const;  // R x H -> R x H x d
  Var aggregate_layer(const Var& pseudo_out, std::size_t layer) const;  // R x P x d -> R x d
  vsm::ProjectionStacks layer_projections(std::size_t layer, std::size_t batch) const;
  std::vector<Var> pseudo_queries(std::size_t layer, std::size_t batch) const;
  const attention::GateParams* gate(std::size_t layer) const;
  Var predict_head(const Var& features) const;  // R x in -> R x F

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  Parameter* find_parameter(const std::string& name);
  std::size_t parameter_count() const;
  void zero_grad();

  // Learned variable memories, or nullptr unless vsm == light.
  const vsm::VariableMemory* memory() const { return memory_ ? &*memory_ : nullptr; }

  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);
  Checkpoint save_state(std::string config_text) const;
  void load_state(const Checkpoint& checkpoint);

 private:
  struct Layer {
    std::vector<Parameter> pseudo;  // P entries, each N x d
    std::optional<attention::GateParams> gate;
    // vsm == off
    std::optional<Parameter> w_key;
    std::optional<Parameter> w_value;
    // vsm == naive
    std::optional<vsm::NaiveProjectionBank> naive;
    // vsm == light
    std::optional<vsm::FactorizedProjection> factors;
    std::optional<vsm::MiddleGenerator> key_generator;
    std::optional<vsm::MiddleGenerator> value_generator;
    Parameter agg_weight;  // (P * d) x d
    Parameter agg_bias;    // d
  };

  Var batch_rows(const Var& per_variable, std::size_t batch) const;

  TriformerConfig config_;
  std::vector<std::size_t> sizes_;
  Parameter embed_weight_;  // 1 x d
  Parameter embed_bias_;    // d
  Tensor positions_;        // H x d
  std::optional<vsm::VariableMemory> memory_;
  std::vector<Layer> layers_;
  Parameter pred_w1_;
  Parameter pred_b1_;
  Parameter pred_w2_;
  Parameter pred_b2_;
};

}  // namespace triformer
