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

#include "attention/attention.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "tensor/error.hpp"

namespace triformer::attention {

CanonicalProjections CanonicalProjections::random(std::size_t d, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(2 * d));
  return CanonicalProjections{
      Parameter("attn.w_query", random_uniform({d, d}, limit, rng)),
      Parameter("attn.w_key", random_uniform({d, d}, limit, rng)),
      Parameter("attn.w_value", random_uniform({d, d}, limit, rng)),
  };
}

GateParams GateParams::random(const std::string& prefix, std::size_t d, Rng& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(d));
  GateParams g;
  g.theta1 = Parameter(prefix + ".theta1", random_uniform({d, d}, limit, rng));
  g.bias1 = Parameter(prefix + ".bias1", Tensor({d}, 0.0));
  g.theta2 = Parameter(prefix + ".theta2", random_uniform({d, d}, limit, rng));
  g.bias2 = Parameter(prefix + ".bias2", Tensor({d}, 0.0));
  return g;
}

GateParams GateParams::zeros(const std::string& prefix, std::size_t d) {
  GateParams g;
  g.theta1 = Parameter(prefix + ".theta1", Tensor({d, d}, 0.0));
  g.bias1 = Parameter(prefix + ".bias1", Tensor({d}, 0.0));
  g.theta2 = Parameter(prefix + ".theta2", Tensor({d, d}, 0.0));
  g.bias2 = Parameter(prefix + ".bias2", Tensor({d}, 0.0));
  return g;
}

Var canonical_self_attention(const Var& x, const Var& w_query, const Var& w_key,
                             const Var& w_value, AttentionStats* stats) {
  const Shape& s = x.shape();
  if (s.size() != 2 && s.size() != 3) {
    throw ShapeError("canonical_self_attention: expected H x d or B x H x d, got " +
                     shape_string(s));
  }
  const bool batched = s.size() == 3;
  const std::size_t batch = batched ? s[0] : 1;
  const std::size_t h = s[s.size() - 2];
  const std::size_t d = s.back();
  for (const Var* w : {&w_query, &w_key, &w_value}) {
    if (w->shape() != Shape{d, d}) {
      throw ShapeError("canonical_self_attention: projection " + shape_string(w->shape()) +
                       " does not match d=" + std::to_string(d));
    }
  }

  const Var flat = reshape(x, {batch * h, d});
  const Shape seq{batch, h, d};
  const Var q = reshape(matmul(flat, w_query), seq);
  const Var k = reshape(matmul(flat, w_key), seq);
  const Var v = reshape(matmul(flat, w_value), seq);
  const Var scores = scale(bmm(q, k, Transpose::yes), 1.0 / std::sqrt(static_cast<double>(d)));
  const Var out = bmm(softmax_rows(scores), v);
  if (stats) stats->score_count += static_cast<std::uint64_t>(batch) * h * h;
  return batched ? out : reshape(out, {h, d});
}

Var canonical_self_attention(const Var& x, const CanonicalProjections& proj,
                             AttentionStats* stats) {
  return canonical_self_attention(x, proj.query.var(), proj.key.var(), proj.value.var(), stats);
}

Var patch_attention(const Var& pseudo, const Var& patch, const Var& w_key, const Var& w_value,
                    AttentionStats* stats) {
  if (patch.shape().size() != 3) {
    throw ShapeError("patch_attention: patch must be R x S x d, got " +
                     shape_string(patch.shape()));
  }
  const std::size_t rows = patch.shape()[0];
  const std::size_t len = patch.shape()[1];
  const std::size_t d = patch.shape()[2];
  if (pseudo.shape() != Shape{rows, d}) {
    throw ShapeError("patch_attention: pseudo timestamp " + shape_string(pseudo.shape()) +
                     " does not match patch " + shape_string(patch.shape()));
  }
  for (const Var* w : {&w_key, &w_value}) {
    if (w->shape() != Shape{rows, d, d}) {
      throw ShapeError("patch_attention: projection stack " + shape_string(w->shape()) +
                       " does not match " + shape_string(Shape{rows, d, d}));
    }
  }

  const Var keys = bmm(patch, w_key);      // R x S x d
  const Var values = bmm(patch, w_value);  // R x S x d
  const Var query = reshape(pseudo, {rows, 1, d});
  const Var scores = scale(bmm(query, keys, Transpose::yes), 1.0 / std::sqrt(static_cast<double>(d)));
  const Var out = bmm(softmax_rows(scores), values);  // R x 1 x d
  if (stats) {
    stats->score_count += static_cast<std::uint64_t>(rows) * len;
    stats->patch_calls += 1;
  }
  return reshape(out, {rows, d});
}

Var gated_recurrent_update(const Var& prev_out, const Var& next, const GateParams& gate) {
  if (prev_out.shape() != next.shape() || prev_out.shape().size() != 2) {
    throw ShapeError("gated_recurrent_update: expected matching R x d operands, got " +
                     shape_string(prev_out.shape()) + " and " + shape_string(next.shape()));
  }
  const std::size_t rows = prev_out.shape()[0];
  const Var candidate =
      tanh(add(matmul(prev_out, gate.theta1.var(), Transpose::yes), tile(gate.bias1.var(), rows)));
  const Var ratio = sigmoid(
      add(matmul(prev_out, gate.theta2.var(), Transpose::yes), tile(gate.bias2.var(), rows)));
  return add(mul(candidate, ratio), next);
}

Var pa_layer_forward(const Var& embeds, std::span<const Var> pseudo, const Var& w_key,
                     const Var& w_value, const GateParams* gate, bool recurrent,
                     AttentionStats* stats) {
  if (embeds.shape().size() != 3) {
    throw ShapeError("pa_layer_forward: embeddings must be R x T x d, got " +
                     shape_string(embeds.shape()));
  }
  const std::size_t rows = embeds.shape()[0];
  const std::size_t len = embeds.shape()[1];
  const std::size_t d = embeds.shape()[2];
  const std::size_t patches = pseudo.size();
  if (patches == 0 || len % patches != 0) {
    throw ConfigError("pa_layer_forward: divisibility violation, " + std::to_string(len) +
                      " timestamps cannot form " + std::to_string(patches) + " equal patches");
  }
  if (recurrent && gate == nullptr) {
    throw ConfigError("pa_layer_forward: recurrent layer requires gate parameters");
  }
  const std::size_t patch_len = len / patches;

  std::vector<Var> outputs;
  outputs.reserve(patches);
  for (std::size_t p = 0; p < patches; ++p) {
    const Var patch = slice(embeds, 1, p * patch_len, (p + 1) * patch_len);
    Var query = pseudo[p];
    if (recurrent && p > 0) query = gated_recurrent_update(outputs.back(), query, *gate);
    outputs.push_back(patch_attention(query, patch, w_key, w_value, stats));
  }
  for (Var& o : outputs) o = reshape(o, {rows, 1, d});
  return concat(outputs, 1);
}

}  // namespace triformer::attention
