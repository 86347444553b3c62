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

// Exercises the shared library through its C interface only.

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "triformer/triformer.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "triformer_capi_test";
  fs::create_directories(dir);
  return dir / name;
}

trf_config* tiny_config(const char* extra = "") {
  trf_config* cfg = nullptr;
  const std::string text = std::string(
                               "data.synth.n = 3\n"
                               "data.synth.t = 400\n"
                               "model.h = 12\n"
                               "model.f = 2\n"
                               "model.patch_sizes = 3,2,2\n"
                               "model.d = 4\n"
                               "model.m = 2\n"
                               "model.a = 2\n"
                               "train.max_epochs = 2\n"
                               "train.lr = 1e-3\n") +
                           extra;
  REQUIRE(trf_config_parse(text.c_str(), &cfg) == TRF_OK);
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE("c api") {

TEST_CASE("version and argument checks") {
  CHECK(std::string(trf_version()) == "1.0.0");
  CHECK(trf_config_new(nullptr) == TRF_ERR_ARGUMENT);
  CHECK(std::string(trf_last_error()).find("invalid argument") != std::string::npos);
  trf_config_free(nullptr);
  trf_model_free(nullptr);
}

TEST_CASE("configuration handles") {
  trf_config* cfg = nullptr;
  REQUIRE(trf_config_new(&cfg) == TRF_OK);
  const char* value = nullptr;
  REQUIRE(trf_config_get(cfg, "model.h", &value) == TRF_OK);
  CHECK(std::string(value) == "96");
  CHECK(trf_config_apply(cfg, "model.h=48") == TRF_OK);
  REQUIRE(trf_config_get(cfg, "model.h", &value) == TRF_OK);
  CHECK(std::string(value) == "48");
  CHECK(trf_config_set(cfg, "model.unknown", "1") == TRF_ERR_CONFIG);
  CHECK(std::string(trf_last_error()).find("model.unknown") != std::string::npos);

  trf_config* other = nullptr;
  REQUIRE(trf_config_parse("data.path = x.csv\nmodel.h = 24\n", &other) == TRF_OK);
  CHECK(trf_config_merge(cfg, other, "data.") == TRF_OK);
  REQUIRE(trf_config_get(cfg, "data.path", &value) == TRF_OK);
  CHECK(std::string(value) == "x.csv");
  REQUIRE(trf_config_get(cfg, "model.h", &value) == TRF_OK);
  CHECK(std::string(value) == "48");

  const fs::path path = scratch("written.cfg");
  REQUIRE(trf_config_write(cfg, path.string().c_str()) == TRF_OK);
  trf_config* reread = nullptr;
  REQUIRE(trf_config_load(path.string().c_str(), &reread) == TRF_OK);
  REQUIRE(trf_config_get(reread, "data.path", &value) == TRF_OK);
  CHECK(std::string(value) == "x.csv");
  CHECK(trf_config_load("/nonexistent.cfg", &reread) == TRF_ERR_CONFIG);
  trf_config_free(reread);
  trf_config_free(other);
  trf_config_free(cfg);
}

TEST_CASE("structural analysis") {
  const size_t patches[] = {3, 2, 2};
  size_t sizes[3] = {};
  REQUIRE(trf_validate_patches(12, patches, 3, sizes) == TRF_OK);
  CHECK(sizes[0] == 12);
  CHECK(sizes[1] == 4);
  CHECK(sizes[2] == 2);
  const size_t bad[] = {3, 2};
  CHECK(trf_validate_patches(10, bad, 2, sizes) == TRF_ERR_CONFIG);
  CHECK(std::string(trf_last_error()).find("divisibility") != std::string::npos);

  uint64_t count = 0;
  REQUIRE(trf_parameter_count(TRF_PROJECTION_LIGHT, 321, 32, 5, 5, 1, &count) == TRF_OK);
  CHECK(count == 2545);
  REQUIRE(trf_parameter_count(TRF_PROJECTION_NAIVE, 321, 32, 5, 5, 1, &count) == TRF_OK);
  CHECK(count == 657408);

  trf_config* cfg = tiny_config();
  uint64_t scores = 0, flops = 0;
  REQUIRE(trf_complexity_probe(cfg, 1, &scores, &flops) == TRF_OK);
  CHECK(scores == 18);
  CHECK(flops > 0);
  trf_config_free(cfg);
}

TEST_CASE("model lifecycle, checkpoint round trip and memories") {
  trf_config* cfg = tiny_config();
  trf_model* model = nullptr;
  REQUIRE(trf_model_create(cfg, 3, &model) == TRF_OK);
  CHECK(trf_model_variables(model) == 3);
  CHECK(trf_model_lookback(model) == 12);
  CHECK(trf_model_horizon(model) == 2);
  CHECK(trf_model_parameter_count(model) > 0);

  std::vector<double> input(2 * 3 * 12);
  for (std::size_t i = 0; i < input.size(); ++i) input[i] = 0.1 * double(i % 17) - 0.5;
  std::vector<double> out_a(2 * 3 * 2), out_b(2 * 3 * 2);
  REQUIRE(trf_model_forward(model, input.data(), 2, out_a.data()) == TRF_OK);

  const fs::path ck = scratch("model.trf");
  REQUIRE(trf_model_save(model, ck.string().c_str()) == TRF_OK);
  trf_model* loaded = nullptr;
  REQUIRE(trf_model_load(ck.string().c_str(), &loaded) == TRF_OK);
  REQUIRE(trf_model_forward(loaded, input.data(), 2, out_b.data()) == TRF_OK);
  CHECK(out_a == out_b);
  const fs::path ck2 = scratch("model2.trf");
  REQUIRE(trf_model_save(loaded, ck2.string().c_str()) == TRF_OK);
  CHECK(slurp(ck) == slurp(ck2));

  const double* mem = nullptr;
  size_t rows = 0, cols = 0;
  REQUIRE(trf_model_memories(loaded, &mem, &rows, &cols) == TRF_OK);
  CHECK(rows == 3);
  CHECK(cols == 2);
  const fs::path csv = scratch("memories.csv");
  REQUIRE(trf_model_export_memories(loaded, csv.string().c_str()) == TRF_OK);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "var_0,var_1");
  for (std::size_t r = 0; r < rows; ++r) {
    REQUIRE(std::getline(in, line));
    std::istringstream cells(line);
    std::string cell;
    for (std::size_t c = 0; c < cols; ++c) {
      std::getline(cells, cell, ',');
      CHECK(std::strtod(cell.c_str(), nullptr) == mem[r * cols + c]);
    }
  }

  CHECK(trf_model_load("/nonexistent.trf", &loaded) != TRF_OK);
  trf_model_free(loaded);
  trf_model_free(model);
  trf_config_free(cfg);
}

TEST_CASE("models without memories report it") {
  trf_config* cfg = tiny_config("model.vsm = off\n");
  trf_model* model = nullptr;
  REQUIRE(trf_model_create(cfg, 3, &model) == TRF_OK);
  CHECK(trf_model_export_memories(model, scratch("none.csv").string().c_str()) == TRF_ERR_CONFIG);
  CHECK(std::string(trf_last_error()) == "no memories in checkpoint");
  trf_model_free(model);
  trf_config_free(cfg);
}

TEST_CASE("training, evaluation and the shape guard") {
  trf_config* cfg = tiny_config();
  trf_dataset* ds = nullptr;
  REQUIRE(trf_dataset_open(cfg, &ds) == TRF_OK);
  CHECK(trf_dataset_variables(ds) == 3);
  CHECK(trf_dataset_windows(ds, TRF_SPLIT_TRAIN) == 240 - 14 + 1);
  CHECK(trf_dataset_windows(ds, TRF_SPLIT_VAL) == 80 - 14 + 1);

  trf_model* model = nullptr;
  REQUIRE(trf_model_create(cfg, 3, &model) == TRF_OK);
  trf_history* history = nullptr;
  REQUIRE(trf_train(model, ds, cfg, &history) == TRF_OK);
  CHECK(trf_history_epochs(history) == 2);
  size_t best_epoch = 0;
  trf_metrics best{};
  REQUIRE(trf_history_best(history, &best_epoch, &best) == TRF_OK);
  trf_metrics val{};
  REQUIRE(trf_evaluate(model, ds, TRF_SPLIT_VAL, &val) == TRF_OK);
  CHECK(val.mse == best.mse);
  CHECK(val.mae == best.mae);
  trf_metrics base{};
  REQUIRE(trf_persistence(ds, TRF_SPLIT_TEST, &base) == TRF_OK);
  CHECK(base.mse > 0.0);

  const fs::path json = scratch("history.json");
  REQUIRE(trf_history_set_checkpoint(history, "ck.trf") == TRF_OK);
  REQUIRE(trf_history_write_json(history, json.string().c_str()) == TRF_OK);
  CHECK(slurp(json).find("\"best_epoch\"") != std::string::npos);

  trf_config* wide = tiny_config("data.synth.n = 5\n");
  trf_dataset* wide_ds = nullptr;
  REQUIRE(trf_dataset_open(wide, &wide_ds) == TRF_OK);
  CHECK(trf_evaluate(model, wide_ds, TRF_SPLIT_TEST, &val) == TRF_ERR_CONFIG);

  trf_dataset_free(wide_ds);
  trf_config_free(wide);
  trf_history_free(history);
  trf_model_free(model);
  trf_dataset_free(ds);
  trf_config_free(cfg);
}

TEST_CASE("data errors") {
  trf_table* table = nullptr;
  CHECK(trf_table_load_csv("/nonexistent.csv", &table) == TRF_ERR_DATA);
  const fs::path bad = scratch("bad.csv");
  std::ofstream(bad) << "date,a\n2020-01-01,1\n2020-01-02,abc\n";
  CHECK(trf_table_load_csv(bad.string().c_str(), &table) == TRF_ERR_DATA);
  CHECK(std::string(trf_last_error()).find("row 2") != std::string::npos);

  REQUIRE(trf_table_synth(2, 50, 7, 1.0, &table) == TRF_OK);
  CHECK(trf_table_rows(table) == 50);
  CHECK(trf_table_variables(table) == 2);
  const fs::path good = scratch("synth.csv");
  REQUIRE(trf_table_save_csv(table, good.string().c_str()) == TRF_OK);
  trf_table* back = nullptr;
  REQUIRE(trf_table_load_csv(good.string().c_str(), &back) == TRF_OK);
  for (std::size_t i = 0; i < 100; ++i) CHECK(trf_table_values(back)[i] == trf_table_values(table)[i]);
  trf_table_free(back);
  trf_table_free(table);

  trf_config* cfg = tiny_config("data.synth.t = 40\n");
  trf_dataset* ds = nullptr;
  CHECK(trf_dataset_open(cfg, &ds) == TRF_ERR_DATA);
  trf_config_free(cfg);
}

TEST_CASE("bench through the C interface") {
  const size_t hs[] = {16, 64};
  trf_bench* bench = nullptr;
  REQUIRE(trf_bench_run(hs, 2, 1, 4, 1, &bench) == TRF_OK);
  CHECK(trf_bench_rows(bench) == 4);
  size_t h = 0;
  const char* mech = nullptr;
  double secs = 0.0;
  uint64_t count = 0;
  REQUIRE(trf_bench_row(bench, 0, &h, &mech, &secs, &count) == TRF_OK);
  CHECK(h == 16);
  CHECK(std::string(mech) == "patch");
  CHECK(count == 16 + 4);
  double slope = 0.0;
  CHECK(trf_bench_slope(bench, "canonical", &slope) == TRF_OK);
  trf_bench_free(bench);
  const size_t invalid[] = {100};
  CHECK(trf_bench_run(invalid, 1, 1, 4, 1, &bench) == TRF_ERR_CONFIG);
}

}  // TEST_SUITE
