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

#include "data/series.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tensor/error.hpp"

namespace triformer::data {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool looks_like_date_column(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return name == "date" || name == "time" || name == "timestamp" || name == "datetime" ||
         name.find("date") != std::string::npos;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

SeriesTable SeriesTable::segment(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows) throw DataError("segment out of range");
  SeriesTable out;
  out.timestamp_column = timestamp_column;
  out.columns = columns;
  out.rows = end - begin;
  const std::size_t n = columns.size();
  out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(begin * n),
                    values.begin() + static_cast<std::ptrdiff_t>(end * n));
  if (!timestamps.empty()) {
    out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                          timestamps.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

SeriesTable parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw DataError(source + ": empty file");
  }
  std::vector<std::string> header = split_fields(line);
  SeriesTable table;
  const bool has_time = looks_like_date_column(header.front());
  if (has_time) {
    table.timestamp_column = header.front();
    table.columns.assign(header.begin() + 1, header.end());
  } else {
    table.columns = header;
  }
  if (table.columns.empty()) throw DataError(source + ": no value columns");
  const std::size_t first_value = has_time ? 1 : 0;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError(source + ": row " + std::to_string(table.rows + 1) + " (line " +
                      std::to_string(line_no) + ") has " + std::to_string(fields.size()) +
                      " cells, expected " + std::to_string(header.size()));
    }
    if (has_time) {
      if (!table.timestamps.empty() && !(table.timestamps.back() < fields[0])) {
        throw DataError(source + ": timestamps not strictly increasing at row " +
                        std::to_string(table.rows + 1));
      }
      table.timestamps.push_back(fields[0]);
    }
    for (std::size_t c = first_value; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw DataError(source + ": non-numeric cell '" + fields[c] + "' at row " +
                        std::to_string(table.rows + 1) + ", column '" + header[c] + "'");
      }
      table.values.push_back(v);
    }
    ++table.rows;
  }
  if (table.rows == 0) throw DataError(source + ": no data rows");
  return table;
}

SeriesTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return parse_csv(in, path);
}

void write_csv(std::ostream& out, const SeriesTable& table) {
  const bool has_time = !table.timestamps.empty();
  if (has_time) out << (table.timestamp_column.empty() ? "date" : table.timestamp_column) << ',';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t t = 0; t < table.rows; ++t) {
    if (has_time) out << table.timestamps[t] << ',';
    for (std::size_t i = 0; i < table.variables(); ++i) out << (i ? "," : "") << table.at(t, i);
    out << '\n';
  }
  out.precision(old_precision);
}

void save_csv(const std::string& path, const SeriesTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, table);
  if (!out) throw IoError("failed writing '" + path + "'");
}

StandardizeStats fit_standardize(const SeriesTable& table) {
  const std::size_t n = table.variables();
  if (table.rows == 0) throw DataError("standardize: empty table");
  StandardizeStats s;
  s.mean.assign(n, 0.0);
  s.stddev.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t t = 0; t < table.rows; ++t) sum += table.at(t, i);
    const double mean = sum / static_cast<double>(table.rows);
    double sq = 0.0;
    for (std::size_t t = 0; t < table.rows; ++t) {
      const double e = table.at(t, i) - mean;
      sq += e * e;
    }
    const double sd = std::sqrt(sq / static_cast<double>(table.rows));
    if (!(sd > 1e-12)) {
      throw DataError("standardize: column '" + table.columns[i] + "' is constant");
    }
    s.mean[i] = mean;
    s.stddev[i] = sd;
  }
  return s;
}

SeriesTable apply_standardize(const SeriesTable& table, const StandardizeStats& stats) {
  if (stats.mean.size() != table.variables()) throw ShapeError("standardize: stats width mismatch");
  SeriesTable out = table;
  for (std::size_t t = 0; t < out.rows; ++t) {
    for (std::size_t i = 0; i < out.variables(); ++i) {
      out.at(t, i) = (out.at(t, i) - stats.mean[i]) / stats.stddev[i];
    }
  }
  return out;
}

SeriesTable destandardize(const SeriesTable& table, const StandardizeStats& stats) {
  if (stats.mean.size() != table.variables()) throw ShapeError("destandardize: stats width mismatch");
  SeriesTable out = table;
  for (std::size_t t = 0; t < out.rows; ++t) {
    for (std::size_t i = 0; i < out.variables(); ++i) {
      out.at(t, i) = out.at(t, i) * stats.stddev[i] + stats.mean[i];
    }
  }
  return out;
}

std::pair<SeriesTable, StandardizeStats> standardize(const SeriesTable& table) {
  StandardizeStats stats = fit_standardize(table);
  return {apply_standardize(table, stats), std::move(stats)};
}

Splits split(const SeriesTable& table, const SplitSpec& spec, std::size_t min_rows) {
  if (spec.train <= 0.0 || spec.val < 0.0 || spec.test < 0.0 ||
      spec.train + spec.val + spec.test > 1.0 + 1e-9) {
    throw ConfigError("split fractions must be non-negative, train positive, and sum to at most 1");
  }
  auto rows_for = [&](double frac) {
    return static_cast<std::size_t>(std::floor(frac * static_cast<double>(table.rows) + 1e-9));
  };
  const std::size_t n_train = rows_for(spec.train);
  const std::size_t n_val = rows_for(spec.val);
  const std::size_t n_test = std::min(rows_for(spec.test), table.rows - n_train - n_val);

  Splits s;
  s.val_begin = n_train;
  s.test_begin = n_train + n_val;
  s.train = table.segment(0, n_train);
  s.val = table.segment(s.val_begin, s.val_begin + n_val);
  s.test = table.segment(s.test_begin, s.test_begin + n_test);
  if (min_rows > 0) {
    const std::pair<const char*, std::size_t> parts[] = {
        {"train", n_train}, {"val", n_val}, {"test", n_test}};
    for (const auto& [name, count] : parts) {
      if (count < min_rows) {
        throw DataError(std::string(name) + " segment has " + std::to_string(count) +
                        " rows, fewer than H+F=" + std::to_string(min_rows));
      }
    }
  }
  return s;
}

WindowDataset::WindowDataset(SeriesTable segment, std::size_t lookback, std::size_t horizon)
    : segment_(std::move(segment)), lookback_(lookback), horizon_(horizon), count_(0) {
  if (lookback == 0 || horizon == 0) throw ConfigError("windows: H and F must be positive");
  if (segment_.rows < lookback + horizon) {
    throw DataError("windows: segment of " + std::to_string(segment_.rows) +
                    " rows is shorter than H+F=" + std::to_string(lookback + horizon));
  }
  count_ = segment_.rows - lookback - horizon + 1;
}

void WindowDataset::copy_rows(std::size_t first, std::size_t len, double* out) const {
  const std::size_t n = segment_.variables();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < len; ++t) out[i * len + t] = segment_.at(first + t, i);
  }
}

void WindowDataset::require_index(std::size_t k) const {
  if (k >= count_) {
    throw DataError("window " + std::to_string(k) + " out of range (" + std::to_string(count_) +
                    " windows)");
  }
}

Tensor WindowDataset::input(std::size_t k) const {
  require_index(k);
  Tensor out({variables(), lookback_});
  copy_rows(k, lookback_, out.raw());
  return out;
}

Tensor WindowDataset::target(std::size_t k) const {
  require_index(k);
  Tensor out({variables(), horizon_});
  copy_rows(k + lookback_, horizon_, out.raw());
  return out;
}

Tensor WindowDataset::inputs(std::span<const std::size_t> ks) const {
  Tensor out({ks.size(), variables(), lookback_});
  for (std::size_t b = 0; b < ks.size(); ++b) {
    require_index(ks[b]);
    copy_rows(ks[b], lookback_, out.raw() + b * variables() * lookback_);
  }
  return out;
}

Tensor WindowDataset::targets(std::span<const std::size_t> ks) const {
  Tensor out({ks.size(), variables(), horizon_});
  for (std::size_t b = 0; b < ks.size(); ++b) {
    require_index(ks[b]);
    copy_rows(ks[b] + lookback_, horizon_, out.raw() + b * variables() * horizon_);
  }
  return out;
}

}  // namespace triformer::data
