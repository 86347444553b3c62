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

#include "model/config.hpp"

#include <cstdlib>
#include <numeric>
#include <sstream>

#include "tensor/error.hpp"

namespace triformer {

std::string to_string(VsmMode mode) {
  switch (mode) {
    case VsmMode::off: return "off";
    case VsmMode::naive: return "naive";
    case VsmMode::light: return "light";
  }
  return "?";
}

VsmMode parse_vsm_mode(const std::string& text) {
  if (text == "off") return VsmMode::off;
  if (text == "naive") return VsmMode::naive;
  if (text == "light") return VsmMode::light;
  throw ConfigError("unknown vsm mode '" + text + "' (expected off, naive or light)");
}

namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

}  // namespace

std::vector<std::size_t> suggest_patch_sizes(std::size_t lookback,
                                             const std::vector<std::size_t>& patches) {
  std::vector<std::size_t> out;
  std::size_t t = lookback;
  for (std::size_t wanted : patches) {
    if (t < 2) break;
    std::size_t best = 0;
    std::size_t best_gap = 0;
    for (std::size_t s = 2; s <= t; ++s) {
      if (t % s != 0) continue;
      const std::size_t gap = s > wanted ? s - wanted : wanted - s;
      if (best == 0 || gap < best_gap) {
        best = s;
        best_gap = gap;
      }
    }
    out.push_back(best);
    t /= best;
  }
  return out;
}

std::vector<std::size_t> layer_sizes(std::size_t lookback,
                                     const std::vector<std::size_t>& patches) {
  if (lookback == 0) throw ConfigError("lookback H must be positive");
  if (patches.empty()) throw ConfigError("patch_sizes must list at least one layer");
  std::vector<std::size_t> sizes;
  std::size_t t = lookback;
  for (std::size_t l = 0; l < patches.size(); ++l) {
    const std::size_t s = patches[l];
    if (s < 2) {
      throw ConfigError("patch size below triangular bound: layer " + std::to_string(l + 1) +
                        " has S=" + std::to_string(s) + " (need S >= 2)");
    }
    if (t % s != 0) {
      throw ConfigError("divisibility violation: layer " + std::to_string(l + 1) + " input size " +
                        std::to_string(t) + " is not divisible by patch size " +
                        std::to_string(s) + " in " + join(patches) + " for H=" +
                        std::to_string(lookback) + "; nearest valid patch list " +
                        join(suggest_patch_sizes(lookback, patches)));
    }
    sizes.push_back(t);
    t /= s;
  }
  return sizes;
}

std::vector<std::size_t> validate_config(const TriformerConfig& c) {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(c.lookback, "H");
  positive(c.horizon, "F");
  positive(c.variables, "N");
  positive(c.hidden, "d");
  positive(c.memory, "m");
  positive(c.middle, "a");
  if (c.vsm == VsmMode::light && c.middle > c.hidden) {
    throw ConfigError("middle width a=" + std::to_string(c.middle) +
                      " must not exceed hidden width d=" + std::to_string(c.hidden));
  }
  std::vector<std::size_t> sizes = layer_sizes(c.lookback, c.patch_sizes);
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total >= 2 * c.lookback) {
    // Unreachable when every S_l >= 2; kept as an explicit check of the bound.
    throw ConfigError("sum of layer input sizes " + std::to_string(total) + " is not below 2H");
  }
  return sizes;
}

ComplexityEstimate complexity_probe(const TriformerConfig& c) {
  ComplexityEstimate e;
  e.layer_sizes = validate_config(c);
  const std::uint64_t n = c.variables;
  const std::uint64_t h = c.lookback;
  const std::uint64_t d = c.hidden;
  const std::uint64_t m = c.memory;
  const std::uint64_t a = c.middle;
  const std::uint64_t layers = c.layers();

  std::uint64_t flops = 4 * n * h * d;  // value projection, bias, positional table
  for (std::size_t l = 0; l < layers; ++l) {
    const std::uint64_t t = e.layer_sizes[l];
    const std::uint64_t patches = t / c.patch_sizes[l];
    e.attention_score_count += n * t;

    if (c.vsm == VsmMode::light) {
      std::uint64_t role = 2 * n * m * a * a + n * a * a + 2 * n * d * a * a + 2 * n * d * a * d;
      if (c.generator_activation == vsm::GeneratorActivation::tanh) role += n * a * a;
      flops += 2 * role;
    }
    // Key/value projections, scores, scaling, softmax, weighted sum.
    flops += 4 * n * t * d * d + 4 * n * t * d + 5 * n * t;
    if (c.recurrent) flops += (patches - 1) * (4 * n * d * d + 6 * n * d);
    flops += 2 * n * patches * d * d + n * d;  // aggregation
  }
  const std::uint64_t in = c.multiscale ? layers * d : d;
  const std::uint64_t hp = c.predictor_width();
  const std::uint64_t f = c.horizon;
  flops += 2 * n * in * hp + 2 * n * hp + 2 * n * hp * f + n * f;

  e.canonical_score_count = n * h * h;
  e.total_flop_estimate = flops;
  return e;
}

}  // namespace triformer
