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

#include "tensor/autograd.hpp"
#include "tensor/optim.hpp"
#include "tensor/random.hpp"

namespace triformer::attention {

// Query/key/value projections of ordinary self-attention, each d x d.
struct CanonicalProjections {
  Parameter query;
  Parameter key;
  Parameter value;

  static CanonicalProjections random(std::size_t d, Rng& rng);
};

// Gate of the recurrent connection between consecutive patches.
// theta1/theta2 are d x d, bias1/bias2 are d-vectors.
struct GateParams {
  Parameter theta1;
  Parameter bias1;
  Parameter theta2;
  Parameter bias2;

  static GateParams random(const std::string& prefix, std::size_t d, Rng& rng);
  static GateParams zeros(const std::string& prefix, std::size_t d);
};

// Running totals of attention work, used by the complexity probes.
struct AttentionStats {
  std::uint64_t score_count = 0;
  std::uint64_t patch_calls = 0;
};

// softmax(Q K^T / sqrt(d)) V with Q = xW_Q, K = xW_K, V = xW_V.
// `x` is H x d, or B x H x d for B independent sequences sharing the weights.
Var canonical_self_attention(const Var& x, const Var& w_query, const Var& w_key,
                             const Var& w_value, AttentionStats* stats = nullptr);
Var canonical_self_attention(const Var& x, const CanonicalProjections& proj,
                             AttentionStats* stats = nullptr);

// One pseudo timestamp per row queries the S real timestamps of that row's
// patch. Rows are independent series (variables, possibly times batch).
//   pseudo:  R x d
//   patch:   R x S x d
//   w_key, w_value: R x d x d   (row-specific projections)
// Returns R x d. Computes exactly R*S attention scores.
Var patch_attention(const Var& pseudo, const Var& patch, const Var& w_key, const Var& w_value,
                    AttentionStats* stats = nullptr);

// tanh(prev Theta1^T + b1) * sigmoid(prev Theta2^T + b2) + next, row by row.
Var gated_recurrent_update(const Var& prev_out, const Var& next, const GateParams& gate);

// One patch-attention layer over R x T x d embeddings with P = T / S patches.
// `pseudo` holds one R x d query per patch. When `recurrent`, patches run
// left to right and each output feeds the next patch's query through `gate`
// (which must then be non-null); otherwise every patch is independent.
// Returns R x P x d.
Var pa_layer_forward(const Var& embeds, std::span<const Var> pseudo, const Var& w_key,
                     const Var& w_value, const GateParams* gate, bool recurrent,
                     AttentionStats* stats = nullptr);

}  // namespace triformer::attention
