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

#include "model/triformer.hpp"

#include <cmath>
#include <utility>

#include "model/checkpoint.hpp"
#include "tensor/error.hpp"
#include "tensor/random.hpp"

namespace triformer {

namespace {

Tensor xavier(std::size_t fan_in, std::size_t fan_out, Shape shape, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return random_uniform(std::move(shape), limit, rng);
}

std::string layer_name(std::size_t l, const std::string& leaf) {
  return "layer" + std::to_string(l) + "." + leaf;
}

}  // namespace

Tensor Triformer::positional_table(std::size_t length, std::size_t d) {
  Tensor table({length, d});
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t k = 0; 2 * k < d; ++k) {
      const double freq = std::pow(10000.0, static_cast<double>(2 * k) / static_cast<double>(d));
      const double angle = static_cast<double>(t) / freq;
      table.at(t, 2 * k) = std::sin(angle);
      if (2 * k + 1 < d) table.at(t, 2 * k + 1) = std::cos(angle);
    }
  }
  return table;
}

Triformer::Triformer(TriformerConfig config)
    : config_(std::move(config)), sizes_(validate_config(config_)) {
  const std::size_t n = config_.variables;
  const std::size_t d = config_.hidden;
  Rng rng(config_.seed);

  embed_weight_ = Parameter("embed.weight", xavier(1, d, {1, d}, rng));
  embed_bias_ = Parameter("embed.bias", Tensor({d}, 0.0));
  positions_ = positional_table(config_.lookback, d);

  if (config_.vsm == VsmMode::light) {
    memory_ = vsm::VariableMemory::random(n, config_.memory, rng);
  }

  const double pseudo_std = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t l = 0; l < config_.layers(); ++l) {
    Layer layer;
    const std::size_t patches = sizes_[l] / config_.patch_sizes[l];
    for (std::size_t p = 0; p < patches; ++p) {
      layer.pseudo.emplace_back(layer_name(l, "pseudo" + std::to_string(p)),
                                random_normal({n, d}, pseudo_std, rng));
    }
    if (config_.recurrent) {
      layer.gate = attention::GateParams::random(layer_name(l, "gate"), d, rng);
    }
    switch (config_.vsm) {
      case VsmMode::off:
        layer.w_key = Parameter(layer_name(l, "w_key"), xavier(d, d, {d, d}, rng));
        layer.w_value = Parameter(layer_name(l, "w_value"), xavier(d, d, {d, d}, rng));
        break;
      case VsmMode::naive:
        layer.naive = vsm::NaiveProjectionBank::random(layer_name(l, "naive"), n, d, rng);
        break;
      case VsmMode::light:
        layer.factors = vsm::FactorizedProjection::random(layer_name(l, "factors"), d,
                                                          config_.middle, rng);
        layer.key_generator =
            vsm::MiddleGenerator::random(layer_name(l, "gen_key"), config_.memory,
                                         config_.middle, rng, config_.generator_activation);
        layer.value_generator =
            vsm::MiddleGenerator::random(layer_name(l, "gen_value"), config_.memory,
                                         config_.middle, rng, config_.generator_activation);
        break;
    }
    layer.agg_weight =
        Parameter(layer_name(l, "agg.weight"), xavier(patches * d, d, {patches * d, d}, rng));
    layer.agg_bias = Parameter(layer_name(l, "agg.bias"), Tensor({d}, 0.0));
    layers_.push_back(std::move(layer));
  }

  const std::size_t in = config_.multiscale ? config_.layers() * d : d;
  const std::size_t hp = config_.predictor_width();
  pred_w1_ = Parameter("predictor.w1", xavier(in, hp, {in, hp}, rng));
  pred_b1_ = Parameter("predictor.b1", Tensor({hp}, 0.0));
  pred_w2_ = Parameter("predictor.w2", xavier(hp, config_.horizon, {hp, config_.horizon}, rng));
  pred_b2_ = Parameter("predictor.b2", Tensor({config_.horizon}, 0.0));
}

Var Triformer::batch_rows(const Var& per_variable, std::size_t batch) const {
  Shape rows = per_variable.shape();
  rows[0] *= batch;
  return reshape(tile(per_variable, batch), rows);
}

Var Triformer::embed(const Var& rows) const {
  if (rows.shape().size() != 2 || rows.shape()[1] != config_.lookback) {
    throw ShapeError("embed: expected R x " + std::to_string(config_.lookback) + ", got " +
                     shape_string(rows.shape()));
  }
  const std::size_t r = rows.shape()[0];
  const std::size_t h = config_.lookback;
  const std::size_t d = config_.hidden;
  const Var values = affine(reshape(rows, {r * h, 1}), embed_weight_.var(), embed_bias_.var());
  return add(reshape(values, {r, h, d}), tile(constant(positions_), r));
}

Var Triformer::aggregate_layer(const Var& pseudo_out, std::size_t layer) const {
  const Layer& ly = layers_.at(layer);
  const std::size_t width = ly.agg_weight.shape()[0];
  const Shape& s = pseudo_out.shape();
  if (s.size() != 3 || s[1] * s[2] != width) {
    throw ShapeError("aggregate_layer: width mismatch, " + shape_string(s) + " for aggregator input " +
                     std::to_string(width));
  }
  return affine(reshape(pseudo_out, {s[0], width}), ly.agg_weight.var(), ly.agg_bias.var());
}

vsm::ProjectionStacks Triformer::layer_projections(std::size_t layer, std::size_t batch) const {
  const Layer& ly = layers_.at(layer);
  const std::size_t rows = batch * config_.variables;
  switch (config_.vsm) {
    case VsmMode::off:
      return {tile(ly.w_key->var(), rows), tile(ly.w_value->var(), rows)};
    case VsmMode::naive:
      return {batch_rows(ly.naive->key.var(), batch), batch_rows(ly.naive->value.var(), batch)};
    case VsmMode::light: {
      const vsm::ProjectionStacks per_var = vsm::materialize_projections(
          memory_->memories.var(), *ly.factors, *ly.key_generator, *ly.value_generator);
      return {batch_rows(per_var.key, batch), batch_rows(per_var.value, batch)};
    }
  }
  throw ConfigError("unknown vsm mode");
}

std::vector<Var> Triformer::pseudo_queries(std::size_t layer, std::size_t batch) const {
  std::vector<Var> out;
  for (const Parameter& p : layers_.at(layer).pseudo) out.push_back(batch_rows(p.var(), batch));
  return out;
}

const attention::GateParams* Triformer::gate(std::size_t layer) const {
  const auto& g = layers_.at(layer).gate;
  return g ? &*g : nullptr;
}

Var Triformer::predict_head(const Var& features) const {
  const Var hidden = tanh(affine(features, pred_w1_.var(), pred_b1_.var()));
  return affine(hidden, pred_w2_.var(), pred_b2_.var());
}

Var Triformer::forward(const Tensor& x, attention::AttentionStats* stats) const {
  return forward(constant(x), stats);
}

Var Triformer::forward(const Var& x, attention::AttentionStats* stats) const {
  const Shape& s = x.shape();
  const std::size_t n = config_.variables;
  const std::size_t h = config_.lookback;
  const bool single = s.size() == 2;
  if (!((single && s == Shape{n, h}) || (s.size() == 3 && s[1] == n && s[2] == h))) {
    throw ShapeError("forward: expected input " + shape_string({n, h}) + " or B x " +
                     shape_string({n, h}) + ", got " + shape_string(s));
  }
  const std::size_t batch = single ? 1 : s[0];
  const std::size_t rows = batch * n;

  Var hidden = embed(reshape(x, {rows, h}));
  std::vector<Var> summaries;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const vsm::ProjectionStacks proj = layer_projections(l, batch);
    const std::vector<Var> queries = pseudo_queries(l, batch);
    hidden = attention::pa_layer_forward(hidden, queries, proj.key, proj.value, gate(l),
                                         config_.recurrent, stats);
    summaries.push_back(aggregate_layer(hidden, l));
  }
  const Var features = config_.multiscale ? concat(summaries, 1) : summaries.back();
  const Var out = predict_head(features);
  const std::size_t f = config_.horizon;
  return single ? reshape(out, {n, f}) : reshape(out, {batch, n, f});
}

Tensor Triformer::predict(const Tensor& x) const {
  NoGradGuard guard;
  return forward(x).value();
}

std::vector<const Parameter*> Triformer::parameters() const {
  std::vector<const Parameter*> out{&embed_weight_, &embed_bias_};
  if (memory_) out.push_back(&memory_->memories);
  for (const Layer& ly : layers_) {
    for (const Parameter& p : ly.pseudo) out.push_back(&p);
    if (ly.gate) {
      out.insert(out.end(), {&ly.gate->theta1, &ly.gate->bias1, &ly.gate->theta2, &ly.gate->bias2});
    }
    if (ly.w_key) out.insert(out.end(), {&*ly.w_key, &*ly.w_value});
    if (ly.naive) out.insert(out.end(), {&ly.naive->key, &ly.naive->value});
    if (ly.factors) {
      out.insert(out.end(), {&ly.factors->left_key, &ly.factors->right_key,
                             &ly.factors->left_value, &ly.factors->right_value,
                             &ly.key_generator->weight, &ly.key_generator->bias,
                             &ly.value_generator->weight, &ly.value_generator->bias});
    }
    out.insert(out.end(), {&ly.agg_weight, &ly.agg_bias});
  }
  out.insert(out.end(), {&pred_w1_, &pred_b1_, &pred_w2_, &pred_b2_});
  return out;
}

std::vector<Parameter*> Triformer::parameters() {
  std::vector<Parameter*> out;
  for (const Parameter* p : std::as_const(*this).parameters()) out.push_back(const_cast<Parameter*>(p));
  return out;
}

Parameter* Triformer::find_parameter(const std::string& name) {
  for (Parameter* p : parameters()) {
    if (p->name() == name) return p;
  }
  return nullptr;
}

std::size_t Triformer::parameter_count() const {
  std::size_t total = 0;
  for (const Parameter* p : parameters()) total += p->value().numel();
  return total;
}

void Triformer::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

std::vector<Tensor> Triformer::snapshot() const {
  std::vector<Tensor> out;
  for (const Parameter* p : parameters()) out.push_back(p->value());
  return out;
}

void Triformer::restore(const std::vector<Tensor>& values) {
  const std::vector<Parameter*> params = parameters();
  if (values.size() != params.size()) throw ShapeError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->assign(values[i]);
}

Checkpoint Triformer::save_state(std::string config_text) const {
  Checkpoint ck;
  ck.config_text = std::move(config_text);
  for (const Parameter* p : parameters()) ck.tensors.emplace_back(p->name(), p->value());
  return ck;
}

void Triformer::load_state(const Checkpoint& checkpoint) {
  for (Parameter* p : parameters()) {
    const Tensor* t = checkpoint.find(p->name());
    if (!t) throw ShapeError("checkpoint has no tensor named '" + p->name() + "'");
    p->assign(*t);
  }
}

}  // namespace triformer
