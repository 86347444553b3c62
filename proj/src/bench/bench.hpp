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
#include <vector>

namespace triformer::bench {

// Patch size 4 on every layer, depth floor(log4 H) capped at 5. Throws
// ConfigError when H does not admit such a stack.
std::vector<std::size_t> depth_policy_patches(std::size_t lookback);

struct BenchOptions {
  std::vector<std::size_t> lookbacks{256, 512, 1024, 2048};
  std::size_t variables = 1;
  std::size_t hidden = 32;
  std::size_t repetitions = 5;
  // Each repetition times back-to-back calls for at least this long.
  double min_seconds = 0.02;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::size_t lookback = 0;
  std::string mechanism;  // "patch" or "canonical"
  double median_seconds = 0.0;
  std::uint64_t attention_score_count = 0;
};

// Times forward passes only: the triangular patch-attention stack and
// canonical self-attention over the same embeddings, sequentially. Each
// mechanism gets one untimed warm-up call per lookback.
std::vector<BenchRow> run_bench(const BenchOptions& options);

// Least-squares slope of log(median_seconds) against log(H) for one mechanism.
double loglog_slope(const std::vector<BenchRow>& rows, const std::string& mechanism);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace triformer::bench
