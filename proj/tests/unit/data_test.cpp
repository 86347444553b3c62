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

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "data/series.hpp"
#include "tensor/error.hpp"
#include "tensor/random.hpp"

using namespace triformer;
using namespace triformer::data;

namespace {

std::string error_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    parse_csv(in, "toy.csv");
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

SeriesTable column(std::vector<double> v) {
  SeriesTable t;
  t.columns = {"x"};
  t.rows = v.size();
  t.values = std::move(v);
  return t;
}

// Table whose every cell holds its row index plus a per-column offset.
SeriesTable indexed(std::size_t rows, std::size_t vars) {
  SeriesTable t;
  for (std::size_t i = 0; i < vars; ++i) t.columns.push_back("c" + std::to_string(i));
  t.rows = rows;
  t.values.resize(rows * vars);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < vars; ++i) t.at(r, i) = double(r) + 1000.0 * double(i);
  }
  return t;
}

SeriesTable random_table(std::size_t rows, std::size_t vars, Rng& rng) {
  SeriesTable t = indexed(rows, vars);
  std::normal_distribution<double> dist(3.0, 7.0);
  for (double& v : t.values) v = dist(rng);
  return t;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("toy CSV parses into a rectangular table") {
  std::istringstream in("date,a,b\n2020-01-01 00:00:00,1.5,2\n2020-01-01 01:00:00,-3,4e2\n"
                        "2020-01-01 02:00:00,5,6\n");
  const SeriesTable t = parse_csv(in);
  CHECK(t.rows == 3);
  CHECK(t.columns == std::vector<std::string>{"a", "b"});
  CHECK(t.timestamp_column == "date");
  CHECK(t.timestamps.size() == 3);
  CHECK(t.values == std::vector<double>{1.5, 2, -3, 400, 5, 6});
}

TEST_CASE("ETT-style header keeps every numeric column") {
  std::istringstream in("date,HUFL,HULL,MUFL,MULL,LUFL,LULL,OT\n"
                        "2016-07-01 00:00:00,5.827,2.009,1.599,0.462,4.203,1.340,30.531\n"
                        "2016-07-01 01:00:00,5.693,2.076,1.492,0.426,4.142,1.371,27.787\n");
  const SeriesTable t = parse_csv(in);
  CHECK(t.variables() == 7);
  CHECK(t.columns.back() == "OT");
  CHECK(t.at(1, 6) == 27.787);
}

TEST_CASE("files without a date column use every column") {
  std::istringstream in("x,y\n1,2\n3,4\n");
  const SeriesTable t = parse_csv(in);
  CHECK(t.variables() == 2);
  CHECK(t.timestamps.empty());
}

TEST_CASE("parse errors name the row and column") {
  const std::string msg = error_of("date,a,b\n2020-01-01,1,2\n2020-01-02,abc,3\n");
  CHECK(msg.find("row 2") != std::string::npos);
  CHECK(msg.find("'abc'") != std::string::npos);
  CHECK(msg.find("a") != std::string::npos);
  CHECK(error_of("").find("empty") != std::string::npos);
  CHECK_FALSE(error_of("a,b\n1\n").empty());
  CHECK(error_of("date,a\n2020-01-02,1\n2020-01-01,2\n").find("increasing") != std::string::npos);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("save then load preserves values to full precision") {
  Rng rng(1);
  SeriesTable t = random_table(25, 3, rng);
  t.values[4] = 1.0 / 3.0;
  t.values[5] = 6.02214076e23;
  t.values[6] = -4.9e-300;
  std::ostringstream out;
  write_csv(out, t);
  std::istringstream in(out.str());
  const SeriesTable back = parse_csv(in);
  CHECK(back.columns == t.columns);
  CHECK(back.values == t.values);
}

TEST_CASE("standardizing 1, 2, 3") {
  const auto [z, stats] = standardize(column({1, 2, 3}));
  CHECK(stats.mean[0] == 2.0);
  CHECK(std::abs(stats.stddev[0] - std::sqrt(2.0 / 3.0)) < 1e-15);
  CHECK(std::abs(z.values[0] + 1.224744871391589) < 1e-12);
  CHECK(std::abs(z.values[1]) < 1e-15);
  CHECK(std::abs(z.values[2] - 1.224744871391589) < 1e-12);
}

TEST_CASE("standardization is idempotent and invertible") {
  Rng rng(2);
  const SeriesTable t = random_table(40, 4, rng);
  const auto [z, stats] = standardize(t);
  const auto [zz, stats2] = standardize(z);
  for (std::size_t k = 0; k < z.values.size(); ++k) CHECK(std::abs(zz.values[k] - z.values[k]) < 1e-12);
  const SeriesTable back = destandardize(z, stats);
  for (std::size_t k = 0; k < t.values.size(); ++k) CHECK(std::abs(back.values[k] - t.values[k]) < 1e-12);
}

TEST_CASE("constant columns are rejected by name") {
  SeriesTable t = indexed(5, 2);
  t.columns = {"load", "flat"};
  for (std::size_t r = 0; r < 5; ++r) t.at(r, 1) = 7.0;
  try {
    fit_standardize(t);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("'flat'") != std::string::npos);
  }
}

TEST_CASE("training statistics applied to validation leave a nonzero mean") {
  const SeriesTable t = indexed(50, 1);  // trending series
  const Splits s = split(t, SplitSpec{});
  const StandardizeStats stats = fit_standardize(s.train);
  const SeriesTable val = apply_standardize(s.val, stats);
  double mean = 0.0;
  for (double v : val.values) mean += v;
  CHECK(std::abs(mean / double(val.rows)) > 0.1);
}

TEST_CASE("chronological split") {
  const SeriesTable t = indexed(20, 2);
  const Splits s = split(t, SplitSpec{0.6, 0.2, 0.2});
  CHECK(s.train.rows == 12);
  CHECK(s.val.rows == 4);
  CHECK(s.test.rows == 4);
  CHECK(s.val_begin == 12);
  CHECK(s.test_begin == 16);
  CHECK(s.train.at(11, 0) + 1 == s.val.at(0, 0));
  CHECK(s.val.at(3, 0) + 1 == s.test.at(0, 0));
  CHECK_THROWS_AS(split(t, SplitSpec{0.6, 0.2, 0.2}, 5), DataError);
  CHECK_THROWS_AS(split(t, SplitSpec{0.7, 0.2, 0.2}), ConfigError);
}

TEST_CASE("no window crosses a split boundary") {
  const SeriesTable t = indexed(60, 2);
  const Splits s = split(t, SplitSpec{}, 7);
  const std::size_t h = 4, f = 3;
  const std::pair<const SeriesTable*, std::size_t> parts[] = {
      {&s.train, 0}, {&s.val, s.val_begin}, {&s.test, s.test_begin}};
  for (const auto& [segment, begin] : parts) {
    const WindowDataset w(*segment, h, f);
    for (std::size_t k = 0; k < w.size(); ++k) {
      const Tensor in = w.input(k);
      const Tensor out = w.target(k);
      CHECK(in.at(0, 0) >= double(begin));
      CHECK(out.at(0, f - 1) < double(begin + segment->rows));
      CHECK(out.at(1, 0) == in.at(1, h - 1) + 1.0);
    }
  }
}

TEST_CASE("window indexing") {
  const WindowDataset w(indexed(10, 2), 4, 2);
  CHECK(w.size() == 5);
  const Tensor in = w.input(0);
  const Tensor out = w.target(0);
  CHECK(in.shape() == Shape{2, 4});
  for (std::size_t t = 0; t < 4; ++t) CHECK(in.at(0, t) == double(t));
  CHECK(out.at(0, 0) == 4.0);
  CHECK(out.at(0, 1) == 5.0);
  CHECK(out.at(1, 1) == 1005.0);
  CHECK(w.target(4).at(0, 1) == 9.0);

  const std::vector<std::size_t> ks{3, 1};
  const Tensor batch = w.inputs(ks);
  CHECK(batch.shape() == Shape{2, 2, 4});
  CHECK(batch.at(0, 1, 0) == 1003.0);
  CHECK(w.targets(ks).at(1, 0, 0) == 5.0);

  CHECK_THROWS_AS(WindowDataset(indexed(5, 1), 4, 2), DataError);
  CHECK_THROWS_AS(w.input(5), DataError);
}

TEST_CASE("window count formula") {
  for (std::size_t rows = 2; rows < 20; ++rows) {
    for (std::size_t h = 1; h < rows; ++h) {
      for (std::size_t f = 1; h + f <= rows; ++f) {
        CHECK(WindowDataset(indexed(rows, 1), h, f).size() == rows - h - f + 1);
      }
    }
  }
}

TEST_CASE("synthetic series") {
  SynthSpec spec;
  spec.variables = 4;
  spec.rows = 300;
  const SeriesTable a = synth(spec);
  CHECK(a.values == synth(spec).values);
  CHECK(a.columns == std::vector<std::string>{"v0", "v1", "v2", "v3"});
  spec.seed = 2;
  CHECK_FALSE(a.values == synth(spec).values);

  spec.heterogeneity = 0.0;
  const SynthComponents c = synth_components(spec);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(c.period_a[i] == c.period_a[0]);
    CHECK(c.period_b[i] == c.period_b[0]);
    CHECK(c.phase_a[i] == c.phase_a[0]);
    CHECK(c.phase_b[i] == c.phase_b[0]);
  }
  const SeriesTable same = synth(spec);
  double worst = 0.0;
  for (std::size_t t = 0; t < same.rows; ++t) {
    for (std::size_t i = 1; i < 4; ++i) worst = std::max(worst, std::abs(same.at(t, i) - same.at(t, 0)));
  }
  CHECK(worst < 1.2);  // noise only: sigma 0.1 per variable
}

TEST_CASE("a forecaster that knows the generating sinusoids reaches the noise floor") {
  const SynthSpec spec;  // N=8, T=4000, noise 0.1
  const SeriesTable table = synth(spec);
  const SynthComponents c = synth_components(spec);
  const Splits s = split(table, SplitSpec{});
  const StandardizeStats stats = fit_standardize(s.train);
  const SeriesTable test = apply_standardize(s.test, stats);
  double se = 0.0;
  for (std::size_t r = 0; r < test.rows; ++r) {
    for (std::size_t i = 0; i < test.variables(); ++i) {
      const double truth = (c.signal(i, double(s.test_begin + r)) - stats.mean[i]) / stats.stddev[i];
      se += (test.at(r, i) - truth) * (test.at(r, i) - truth);
    }
  }
  const double mse = se / double(test.rows * test.variables());
  CHECK(mse > 0.008);
  CHECK(mse < 0.012);
}

}  // TEST_SUITE
