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

#include <cmath>
#include <numbers>
#include <random>

#include "data/series.hpp"
#include "tensor/error.hpp"

namespace triformer::data {

namespace {
constexpr double kBasePeriodA = 24.0;
constexpr double kBasePeriodB = 60.0;
}  // namespace

double SynthComponents::signal(std::size_t i, double t) const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return std::sin(two_pi * t / period_a[i] + phase_a[i]) +
         std::sin(two_pi * t / period_b[i] + phase_b[i]);
}

SynthComponents synth_components(const SynthSpec& spec) {
  if (spec.variables == 0 || spec.rows == 0) throw ConfigError("synth: N and T must be positive");
  if (spec.heterogeneity < 0.0) throw ConfigError("synth: heterogeneity must be non-negative");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SynthComponents c;
  for (std::size_t i = 0; i < spec.variables; ++i) {
    // Log-uniform spread around the base periods; phases within [0, 2 pi h).
    c.period_a.push_back(kBasePeriodA * std::exp(spec.heterogeneity * (unit(rng) - 0.5)));
    c.period_b.push_back(kBasePeriodB * std::exp(spec.heterogeneity * (unit(rng) - 0.5)));
    c.phase_a.push_back(spec.heterogeneity * 2.0 * std::numbers::pi * unit(rng));
    c.phase_b.push_back(spec.heterogeneity * 2.0 * std::numbers::pi * unit(rng));
  }
  return c;
}

SeriesTable synth(const SynthSpec& spec) {
  const SynthComponents c = synth_components(spec);
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> noise(0.0, spec.noise);
  SeriesTable table;
  for (std::size_t i = 0; i < spec.variables; ++i) table.columns.push_back("v" + std::to_string(i));
  table.rows = spec.rows;
  table.values.resize(spec.rows * spec.variables);
  for (std::size_t t = 0; t < spec.rows; ++t) {
    for (std::size_t i = 0; i < spec.variables; ++i) {
      table.at(t, i) = c.signal(i, static_cast<double>(t)) + noise(rng);
    }
  }
  return table;
}

}  // namespace triformer::data
