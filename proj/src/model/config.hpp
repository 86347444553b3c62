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
#include <string>
#include <vector>

#include "vsm/vsm.hpp"

namespace triformer {

enum class VsmMode { off, naive, light };

std::string to_string(VsmMode mode);
VsmMode parse_vsm_mode(const std::string& text);

struct TriformerConfig {
  std::size_t lookback = 96;   // H
  std::size_t horizon = 24;    // F
  std::size_t variables = 1;   // N
  std::size_t hidden = 32;     // d
  std::size_t memory = 5;      // m
  std::size_t middle = 5;      // a
  std::vector<std::size_t> patch_sizes{6, 4, 4};
  VsmMode vsm = VsmMode::light;
  bool recurrent = true;
  bool multiscale = true;
  std::uint64_t seed = 1;
  // Hidden width of the predictor; 0 selects 4 * hidden.
  std::size_t predictor_hidden = 0;
  vsm::GeneratorActivation generator_activation = vsm::GeneratorActivation::none;

  std::size_t predictor_width() const { return predictor_hidden ? predictor_hidden : 4 * hidden; }
  std::size_t layers() const { return patch_sizes.size(); }
};

// Input size of every layer, T_1 = H and T_{l+1} = T_l / S_l. Throws
// ConfigError for a patch size below 2 or a chain that does not divide.
std::vector<std::size_t> layer_sizes(std::size_t lookback, const std::vector<std::size_t>& patches);

// Closest patch list (layer by layer) whose divisibility chain holds.
std::vector<std::size_t> suggest_patch_sizes(std::size_t lookback,
                                             const std::vector<std::size_t>& patches);

// Full validation; returns [T_1 .. T_L].
std::vector<std::size_t> validate_config(const TriformerConfig& config);

struct ComplexityEstimate {
  std::vector<std::size_t> layer_sizes;
  std::uint64_t attention_score_count = 0;   // N * sum_l T_l
  std::uint64_t canonical_score_count = 0;   // N * H^2
  std::uint64_t total_flop_estimate = 0;     // one forward pass, batch of one window
};

// Closed-form operation counts; allocates no tensors.
ComplexityEstimate complexity_probe(const TriformerConfig& config);

}  // namespace triformer
