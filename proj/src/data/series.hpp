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
#include <span>
#include <string>
#include <vector>

#include "tensor/tensor.hpp"

namespace triformer::data {

// T x N observations, row-major (one row per timestamp).
struct SeriesTable {
  std::string timestamp_column;         // empty when the file has none
  std::vector<std::string> timestamps;  // informational, empty or one per row
  std::vector<std::string> columns;     // one per variable
  std::size_t rows = 0;
  std::vector<double> values;

  std::size_t variables() const { return columns.size(); }
  double at(std::size_t t, std::size_t i) const { return values[t * columns.size() + i]; }
  double& at(std::size_t t, std::size_t i) { return values[t * columns.size() + i]; }

  // Rows [begin, end) as a new table.
  SeriesTable segment(std::size_t begin, std::size_t end) const;
};

SeriesTable parse_csv(std::istream& in, const std::string& source = "<stream>");
SeriesTable load_csv(const std::string& path);
void write_csv(std::ostream& out, const SeriesTable& table);
void save_csv(const std::string& path, const SeriesTable& table);

struct StandardizeStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation
};

// Throws DataError naming the first column whose spread is at most 1e-12.
StandardizeStats fit_standardize(const SeriesTable& table);
SeriesTable apply_standardize(const SeriesTable& table, const StandardizeStats& stats);
SeriesTable destandardize(const SeriesTable& table, const StandardizeStats& stats);
// Fits on `table` itself and applies.
std::pair<SeriesTable, StandardizeStats> standardize(const SeriesTable& table);

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct Splits {
  SeriesTable train;
  SeriesTable val;
  SeriesTable test;
  std::size_t val_begin = 0;
  std::size_t test_begin = 0;
};

// Chronological contiguous split by row fractions. With `min_rows` > 0 every
// segment must hold at least that many rows (H + F for windowing).
Splits split(const SeriesTable& table, const SplitSpec& spec, std::size_t min_rows = 0);

// Sliding windows with stride 1: window k reads input rows [k, k+H) and
// target rows [k+H, k+H+F).
class WindowDataset {
 public:
  WindowDataset(SeriesTable segment, std::size_t lookback, std::size_t horizon);

  std::size_t size() const noexcept { return count_; }
  std::size_t lookback() const noexcept { return lookback_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t variables() const noexcept { return segment_.variables(); }
  const SeriesTable& segment() const noexcept { return segment_; }

  Tensor input(std::size_t k) const;   // N x H
  Tensor target(std::size_t k) const;  // N x F
  Tensor inputs(std::span<const std::size_t> ks) const;   // B x N x H
  Tensor targets(std::span<const std::size_t> ks) const;  // B x N x F

 private:
  void require_index(std::size_t k) const;
  void copy_rows(std::size_t first, std::size_t len, double* out) const;

  SeriesTable segment_;
  std::size_t lookback_;
  std::size_t horizon_;
  std::size_t count_;
};

struct SynthSpec {
  std::size_t variables = 8;
  std::size_t rows = 4000;
  std::uint64_t seed = 1;
  double heterogeneity = 1.0;
  double noise = 0.1;
};

// Per-variable ground truth of the synthetic generator.
struct SynthComponents {
  std::vector<double> period_a;
  std::vector<double> period_b;
  std::vector<double> phase_a;
  std::vector<double> phase_b;

  double signal(std::size_t variable, double t) const;
};

SynthComponents synth_components(const SynthSpec& spec);
// Variable i at step t: sin(2 pi t / Pa_i + phi_a_i) + sin(2 pi t / Pb_i + phi_b_i)
// plus Gaussian noise. Deterministic given the seed.
SeriesTable synth(const SynthSpec& spec);

}  // namespace triformer::data
