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

// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "triformer/triformer.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int exit_code(trf_status s) {
  switch (s) {
    case TRF_OK: return kExitOk;
    case TRF_ERR_ARGUMENT:
    case TRF_ERR_CONFIG: return kExitConfig;
    case TRF_ERR_DATA:
    case TRF_ERR_IO: return kExitData;
    default: return kExitFailure;
  }
}

struct Failure {
  int code;
};

void check(trf_status s, const std::string& context) {
  if (s != TRF_OK) {
    std::cerr << "triformer: " << context << ": " << trf_last_error() << '\n';
    throw Failure{exit_code(s)};
  }
}

// RAII owners for C handles.
template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  ~Handle() { Free(ptr_); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  T* get() const { return ptr_; }
  T** out() { return &ptr_; }

 private:
  T* ptr_ = nullptr;
};

using Config = Handle<trf_config, trf_config_free>;
using Table = Handle<trf_table, trf_table_free>;
using Dataset = Handle<trf_dataset, trf_dataset_free>;
using Model = Handle<trf_model, trf_model_free>;
using History = Handle<trf_history, trf_history_free>;
using Bench = Handle<trf_bench, trf_bench_free>;

std::string get(const Config& cfg, const char* key) {
  const char* v = nullptr;
  check(trf_config_get(cfg.get(), key, &v), key);
  return v;
}

void load_config(Config& cfg, const std::string& path, const std::vector<std::string>& overrides) {
  if (path.empty()) {
    check(trf_config_new(cfg.out()), "config");
  } else {
    check(trf_config_load(path.c_str(), cfg.out()), "config");
  }
  for (const std::string& o : overrides) check(trf_config_apply(cfg.get(), o.c_str()), "--set " + o);
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      std::cerr << "triformer: not an integer list: '" << text << "'\n";
      throw Failure{kExitConfig};
    }
  }
  return out;
}

std::string json_number(double v) {
  nlohmann::json j = v;
  return j.dump();
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
  Config cfg;
  load_config(cfg, config_path, overrides);
  // Validate the model section before touching data so bad patch lists
  // surface as configuration errors even when the data is unavailable.
  std::uint64_t scores = 0;
  const std::string declared_n = get(cfg, "model.n");
  Dataset ds;
  if (!declared_n.empty()) {
    check(trf_complexity_probe(cfg.get(), 0, &scores, nullptr), "model config");
  } else if (get(cfg, "data.path").empty()) {
    check(trf_complexity_probe(cfg.get(), std::stoull(get(cfg, "data.synth.n")), &scores, nullptr),
          "model config");
  }
  check(trf_dataset_open(cfg.get(), ds.out()), "data");
  const std::size_t n = trf_dataset_variables(ds.get());
  check(trf_complexity_probe(cfg.get(), n, &scores, nullptr), "model config");

  Model model;
  check(trf_model_create(cfg.get(), n, model.out()), "model");
  std::cerr << "training: N=" << n << " windows train/val/test="
            << trf_dataset_windows(ds.get(), TRF_SPLIT_TRAIN) << '/'
            << trf_dataset_windows(ds.get(), TRF_SPLIT_VAL) << '/'
            << trf_dataset_windows(ds.get(), TRF_SPLIT_TEST)
            << " parameters=" << trf_model_parameter_count(model.get()) << '\n';

  History history;
  check(trf_train(model.get(), ds.get(), cfg.get(), history.out()), "train");

  const std::filesystem::path dir = get(cfg, "out.dir");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "triformer: cannot create output directory " << dir << ": " << ec.message() << '\n';
    return kExitData;
  }
  const std::string ckpt = (dir / "checkpoint.trf").string();
  check(trf_model_save(model.get(), ckpt.c_str()), "save checkpoint");
  check(trf_history_set_checkpoint(history.get(), ckpt.c_str()), "history");
  check(trf_history_write_json(history.get(), (dir / "history.json").string().c_str()), "history");
  Config resolved;
  check(trf_model_config(model.get(), resolved.out()), "config");
  check(trf_config_write(resolved.get(), (dir / "config.resolved").string().c_str()), "config");

  for (std::size_t e = 0; e < trf_history_epochs(history.get()); ++e) {
    double loss = 0.0;
    trf_metrics val{};
    check(trf_history_epoch(history.get(), e, &loss, &val), "history");
    std::cout << "epoch " << e + 1 << " train_loss " << json_number(loss) << " val_mse "
              << json_number(val.mse) << " val_mae " << json_number(val.mae) << '\n';
  }
  std::size_t best_epoch = 0;
  trf_metrics best{};
  check(trf_history_best(history.get(), &best_epoch, &best), "history");
  std::cout << "best epoch " << best_epoch << " val_mse " << json_number(best.mse) << " val_mae "
            << json_number(best.mae) << '\n'
            << "wrote " << dir.string() << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& config_path,
             const std::vector<std::string>& overrides, const std::string& split_name,
             std::string out_path) {
  trf_split split;
  if (split_name == "train") {
    split = TRF_SPLIT_TRAIN;
  } else if (split_name == "val") {
    split = TRF_SPLIT_VAL;
  } else if (split_name == "test") {
    split = TRF_SPLIT_TEST;
  } else {
    std::cerr << "triformer: unknown split '" << split_name << "'\n";
    return kExitConfig;
  }
  Model model;
  check(trf_model_load(checkpoint.c_str(), model.out()), "checkpoint");
  Config cfg;
  check(trf_model_config(model.get(), cfg.out()), "checkpoint config");
  if (!config_path.empty() || !overrides.empty()) {
    Config user;
    load_config(user, config_path, overrides);
    check(trf_config_merge(cfg.get(), user.get(), "data."), "config");
    check(trf_config_merge(cfg.get(), user.get(), "split."), "config");
  }
  Dataset ds;
  check(trf_dataset_open(cfg.get(), ds.out()), "data");
  trf_metrics m{};
  check(trf_evaluate(model.get(), ds.get(), split, &m), "evaluate");
  trf_metrics base{};
  check(trf_persistence(ds.get(), split, &base), "persistence");

  nlohmann::ordered_json doc;
  doc["split"] = split_name;
  doc["mse"] = m.mse;
  doc["mae"] = m.mae;
  doc["persistence"] = {{"mse", base.mse}, {"mae", base.mae}};
  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  if (out_path.empty()) {
    out_path = (std::filesystem::path(checkpoint).parent_path() / "metrics.json").string();
  }
  std::ofstream out(out_path);
  out << text;
  if (!out) {
    std::cerr << "triformer: cannot write " << out_path << '\n';
    return kExitData;
  }
  return kExitOk;
}

int cmd_bench(const std::string& lookbacks, std::size_t reps, std::size_t n, std::size_t d,
              const std::string& out_path) {
  const std::vector<std::size_t> hs = parse_list(lookbacks);
  if (hs.empty()) {
    std::cerr << "triformer: --h needs at least one size\n";
    return kExitConfig;
  }
  Bench bench;
  check(trf_bench_run(hs.data(), hs.size(), n, d, reps, bench.out()), "bench");
  std::ostringstream csv;
  csv << "H,mechanism,median_seconds,attention_score_count\n";
  for (std::size_t i = 0; i < trf_bench_rows(bench.get()); ++i) {
    std::size_t h = 0;
    const char* mech = nullptr;
    double secs = 0.0;
    std::uint64_t count = 0;
    check(trf_bench_row(bench.get(), i, &h, &mech, &secs, &count), "bench");
    csv << h << ',' << mech << ',' << json_number(secs) << ',' << count << '\n';
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << csv.str();
  } else {
    check(trf_bench_write_csv(bench.get(), out_path.c_str()), "bench csv");
    std::cout << csv.str();
  }
  if (hs.size() >= 2) {
    double patch = 0.0;
    double canonical = 0.0;
    check(trf_bench_slope(bench.get(), "patch", &patch), "slope");
    check(trf_bench_slope(bench.get(), "canonical", &canonical), "slope");
    std::cout << "# log-log slope: patch " << patch << ", canonical " << canonical << '\n';
  }
  return kExitOk;
}

int cmd_export_memories(const std::string& checkpoint, const std::string& out_path) {
  Model model;
  check(trf_model_load(checkpoint.c_str(), model.out()), "checkpoint");
  check(trf_model_export_memories(model.get(), out_path.c_str()), "export");
  std::cout << "wrote " << out_path << '\n';
  return kExitOk;
}

int cmd_synth(std::size_t n, std::size_t t, std::uint64_t seed, double heterogeneity,
              const std::string& out_path) {
  Table table;
  check(trf_table_synth(n, t, seed, heterogeneity, table.out()), "synth");
  check(trf_table_save_csv(table.get(), out_path.c_str()), "synth");
  std::cout << "wrote " << out_path << " (" << t << " rows, " << n << " variables)\n";
  return kExitOk;
}

int cmd_probe(const std::string& config_path, const std::vector<std::string>& overrides,
              std::size_t n) {
  Config cfg;
  load_config(cfg, config_path, overrides);
  std::vector<std::size_t> patches = parse_list(get(cfg, "model.patch_sizes"));
  const std::size_t h = std::stoull(get(cfg, "model.h"));
  std::vector<std::size_t> sizes(patches.size());
  check(trf_validate_patches(h, patches.data(), patches.size(), sizes.data()), "patch_sizes");
  std::uint64_t scores = 0;
  std::uint64_t flops = 0;
  check(trf_complexity_probe(cfg.get(), n, &scores, &flops), "probe");
  std::cout << "layer_sizes";
  std::size_t total = 0;
  for (std::size_t s : sizes) {
    std::cout << ' ' << s;
    total += s;
  }
  std::cout << "\nsum " << total << " (2H = " << 2 * h << ")\n"
            << "attention_score_count " << scores << '\n'
            << "canonical_score_count " << static_cast<std::uint64_t>(n) * h * h << '\n'
            << "total_flop_estimate " << flops << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triformer: patch-attention forecasting engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* train = app.add_subcommand("train", "Train a model and write checkpoint, history and config");
  train->add_option("-c,--config", config_path, "Run configuration file");
  train->add_option("-s,--set", overrides, "Override KEY=VALUE (repeatable)");

  std::string checkpoint;
  std::string split_name = "test";
  std::string out_path;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint against its data split");
  eval->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("-c,--config", config_path, "Config whose data.* and split.* keys override the checkpoint's");
  eval->add_option("-s,--set", overrides, "Override KEY=VALUE for data.* / split.*");
  eval->add_option("--split", split_name, "train, val or test");
  eval->add_option("-o,--out", out_path, "Metrics JSON path (default: metrics.json next to the checkpoint)");

  std::string lookbacks = "256,512,1024,2048";
  std::size_t reps = 5;
  std::size_t bench_n = 1;
  std::size_t bench_d = 32;
  auto* bench = app.add_subcommand("bench", "Time patch vs canonical attention forward passes");
  bench->set_help_flag("--help", "Print this help message and exit");
  bench->add_option("--h", lookbacks, "Comma-separated lookback sizes");
  bench->add_option("--reps", reps, "Repetitions per size");
  bench->add_option("--n", bench_n, "Variables");
  bench->add_option("--d", bench_d, "Hidden width");
  bench->add_option("-o,--out", out_path, "CSV output path ('-' for stdout only)");

  auto* exportm = app.add_subcommand("export-memories", "Write learned variable memories as CSV");
  exportm->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required();
  exportm->add_option("-o,--out", out_path, "CSV output path")->required();

  std::size_t synth_n = 8;
  std::size_t synth_t = 4000;
  std::uint64_t synth_seed = 1;
  double synth_het = 1.0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multivariate series as CSV");
  synth->add_option("--n", synth_n, "Variables");
  synth->add_option("--t", synth_t, "Rows");
  synth->add_option("--seed", synth_seed, "Seed");
  synth->add_option("--heterogeneity", synth_het, "Spread of per-variable frequencies and phases");
  synth->add_option("-o,--out", out_path, "CSV output path")->required();

  std::size_t probe_n = 1;
  auto* probe = app.add_subcommand("probe", "Print layer sizes and operation counts for a config");
  probe->add_option("-c,--config", config_path, "Run configuration file");
  probe->add_option("-s,--set", overrides, "Override KEY=VALUE (repeatable)");
  probe->add_option("--n", probe_n, "Variables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) return cmd_train(config_path, overrides);
    if (*eval) return cmd_eval(checkpoint, config_path, overrides, split_name, out_path);
    if (*bench) return cmd_bench(lookbacks, reps, bench_n, bench_d, out_path);
    if (*exportm) return cmd_export_memories(checkpoint, out_path);
    if (*synth) return cmd_synth(synth_n, synth_t, synth_seed, synth_het, out_path);
    if (*probe) return cmd_probe(config_path, overrides, probe_n);
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "triformer: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
