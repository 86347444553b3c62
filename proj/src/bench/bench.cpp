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

#include "bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>

#include "attention/attention.hpp"
#include "model/config.hpp"
#include "tensor/error.hpp"
#include "tensor/random.hpp"

namespace triformer::bench {

std::vector<std::size_t> depth_policy_patches(std::size_t lookback) {
  std::size_t depth = 0;
  for (std::size_t t = lookback; t >= 4 && depth < 5; t /= 4) ++depth;
  if (depth == 0) {
    throw ConfigError("bench: H=" + std::to_string(lookback) + " is too short for a patch-4 layer");
  }
  std::vector<std::size_t> patches(depth, 4);
  layer_sizes(lookback, patches);  // throws on divisibility violation
  return patches;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Repeats `fn` until at least `min_seconds` have elapsed; returns the mean
// duration of one call.
template <typename Fn>
double seconds_per_call(const Fn& fn, double min_seconds) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  std::size_t calls = 0;
  double elapsed = 0.0;
  do {
    fn();
    ++calls;
    elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  } while (elapsed < min_seconds);
  return elapsed / double(calls);
}

}  // namespace

namespace {

// Inputs and parameters for one lookback, built once and reused by every
// repetition.
struct Workload {
  Workload(std::size_t h, const BenchOptions& options)
      : lookback(h), patches(depth_policy_patches(h)), sizes(layer_sizes(h, patches)) {
    const std::size_t n = options.variables;
    const std::size_t d = options.hidden;
    const double scale = 1.0 / std::sqrt(double(d));
    Rng rng(options.seed + h);
    embeds = constant(random_normal({n, h, d}, 1.0, rng));
    w_key = constant(random_normal({d, d}, scale, rng));
    w_value = constant(random_normal({d, d}, scale, rng));
    w_query = constant(random_normal({d, d}, scale, rng));
    gate.emplace(attention::GateParams::random("bench.gate", d, rng));
    pseudo.resize(patches.size());
    for (std::size_t l = 0; l < patches.size(); ++l) {
      for (std::size_t p = 0; p < sizes[l] / patches[l]; ++p) {
        pseudo[l].push_back(constant(random_normal({n, d}, scale, rng)));
      }
    }
    key_stack = tile(w_key, n);
    value_stack = tile(w_value, n);
  }

  void patch_pass() {
    attention::AttentionStats stats;
    Var hidden = embeds;
    for (std::size_t l = 0; l < patches.size(); ++l) {
      hidden = attention::pa_layer_forward(hidden, pseudo[l], key_stack, value_stack, &*gate,
                                           true, &stats);
    }
    patch_scores = stats.score_count;
  }

  void canonical_pass() {
    attention::AttentionStats stats;
    const Var out = attention::canonical_self_attention(embeds, w_query, w_key, w_value, &stats);
    canonical_scores = stats.score_count;
  }

  std::size_t lookback;
  std::vector<std::size_t> patches;
  std::vector<std::size_t> sizes;
  Var embeds, w_key, w_value, w_query, key_stack, value_stack;
  std::optional<attention::GateParams> gate;
  std::vector<std::vector<Var>> pseudo;
  std::vector<double> patch_times;
  std::vector<double> canonical_times;
  std::uint64_t patch_scores = 0;
  std::uint64_t canonical_scores = 0;
};

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  if (options.repetitions == 0) throw ConfigError("bench: repetitions must be positive");
  NoGradGuard no_grad;
  std::vector<Workload> loads;
  for (std::size_t h : options.lookbacks) loads.emplace_back(h, options);
  for (Workload& w : loads) {
    w.patch_pass();
    w.canonical_pass();
  }
  // Repetitions sweep all lookbacks in turn so slow drift in machine speed
  // spreads over every H instead of biasing the slope.
  for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
    for (Workload& w : loads) {
      w.patch_times.push_back(seconds_per_call([&] { w.patch_pass(); }, options.min_seconds));
      w.canonical_times.push_back(
          seconds_per_call([&] { w.canonical_pass(); }, options.min_seconds));
    }
  }
  std::vector<BenchRow> rows;
  for (const Workload& w : loads) {
    rows.push_back({w.lookback, "patch", median(w.patch_times), w.patch_scores});
    rows.push_back({w.lookback, "canonical", median(w.canonical_times), w.canonical_scores});
  }
  return rows;
}

double loglog_slope(const std::vector<BenchRow>& rows, const std::string& mechanism) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const BenchRow& r : rows) {
    if (r.mechanism != mechanism) continue;
    xs.push_back(std::log(static_cast<double>(r.lookback)));
    ys.push_back(std::log(std::max(r.median_seconds, 1e-12)));
  }
  if (xs.size() < 2) throw ConfigError("loglog_slope: need at least two sizes");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "H,mechanism,median_seconds,attention_score_count\n";
  const auto old_precision = out.precision(9);
  for (const BenchRow& r : rows) {
    out << r.lookback << ',' << r.mechanism << ',' << r.median_seconds << ','
        << r.attention_score_count << '\n';
  }
  out.precision(old_precision);
}

}  // namespace triformer::bench
