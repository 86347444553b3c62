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

// Acceptance driver. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails. Criteria can be selected by
// number on the command line; the CLI binary path is the first argument
// that is not a number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "attention/attention.hpp"
#include "bench/bench.hpp"
#include "config/run_config.hpp"
#include "data/series.hpp"
#include "model/checkpoint.hpp"
#include "model/config.hpp"
#include "model/triformer.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "training/trainer.hpp"
#include "vsm/vsm.hpp"

using namespace triformer;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Verdict patch_oracle() {
  Rng rng(101);
  std::uniform_int_distribution<std::size_t> n_dist(1, 4), s_dist(1, 6), d_dist(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = n_dist(rng), s = s_dist(rng), d = d_dist(rng);
    const Tensor pseudo = testing::random_tensor({n, d}, rng);
    const Tensor patch = testing::random_tensor({n, s, d}, rng);
    const Tensor wk = testing::random_tensor({n, d, d}, rng);
    const Tensor wv = testing::random_tensor({n, d, d}, rng);
    const Tensor got = attention::patch_attention(constant(pseudo), constant(patch),
                                                  constant(wk), constant(wv))
                           .value();
    worst = std::max(worst, max_abs_diff(got, oracle::patch_attention(pseudo, patch, wk, wv)));
  }
  return {worst < 1e-9, "100 instances, max abs error " + fmt(worst)};
}

Verdict canonical_oracle() {
  Rng rng(202);
  std::uniform_int_distribution<std::size_t> t_dist(1, 6), d_dist(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = t_dist(rng), d = d_dist(rng);
    const Tensor x = testing::random_tensor({t, d}, rng);
    const Tensor wq = testing::random_tensor({d, d}, rng);
    const Tensor wk = testing::random_tensor({d, d}, rng);
    const Tensor wv = testing::random_tensor({d, d}, rng);
    const Tensor got = attention::canonical_self_attention(constant(x), constant(wq),
                                                           constant(wk), constant(wv))
                           .value();
    worst = std::max(worst, max_abs_diff(got, oracle::canonical_attention(x, wq, wk, wv)));
  }
  return {worst < 1e-9, "100 instances, max abs error " + fmt(worst)};
}

Verdict full_gradient() {
  TriformerConfig c;
  c.variables = 3;
  c.lookback = 12;
  c.patch_sizes = {3, 2, 2};
  c.hidden = 4;
  c.memory = 2;
  c.middle = 2;
  c.horizon = 2;
  c.vsm = VsmMode::light;
  c.recurrent = true;
  c.multiscale = true;
  c.seed = 5;
  Triformer model(c);
  Rng rng(303);
  // Zero-initialized biases would hide errors in their own gradients.
  for (Parameter* p : model.parameters()) {
    if (p->name().find("bias") != std::string::npos) {
      p->assign(testing::random_tensor(p->shape(), rng, 0.5));
    }
  }
  const Tensor x = testing::random_tensor({3, 12}, rng);
  const Tensor y = testing::random_tensor({3, 2}, rng);
  std::vector<Var> leaves;
  std::vector<std::string> names;
  for (Parameter* p : model.parameters()) {
    leaves.push_back(p->var());
    names.push_back(p->name());
  }
  const auto report = testing::check_gradients(
      [&] { return mse(model.forward(x), constant(y)); }, leaves, names, 1e-5, 1e-4, 1e-8);
  const bool complete = report.checked == model.parameter_count();
  std::string detail = std::to_string(report.checked) + " coordinates, " +
                       std::to_string(report.failures) + " failures, worst error " +
                       fmt(report.worst_ratio) + " of tolerance";
  if (!complete) detail += ", parameter count mismatch";
  return {report.ok() && complete, detail};
}

Verdict layer_bound() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<std::size_t> patch(2, 8);
  std::size_t checked = 0, violations = 0;
  while (checked < 200) {
    std::vector<std::size_t> patches;
    const std::size_t depth = 1 + rng() % 5;
    std::size_t h = 1;
    for (std::size_t l = 0; l < depth; ++l) {
      patches.push_back(patch(rng));
      h *= patches.back();
    }
    h *= 1 + rng() % 8;
    if (h > 4096) continue;
    const auto sizes = layer_sizes(h, patches);
    if (std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) >= 2 * h) ++violations;
    ++checked;
  }
  return {violations == 0, std::to_string(checked) + " configurations, " +
                               std::to_string(violations) + " violations"};
}

Verdict scaling() {
  bench::BenchOptions options;
  options.repetitions = 5;
  const auto rows = bench::run_bench(options);
  bool counts_ok = true;
  for (const auto& row : rows) {
    if (row.mechanism != "patch") continue;
    const auto sizes = layer_sizes(row.lookback, bench::depth_policy_patches(row.lookback));
    const std::uint64_t expect =
        options.variables * std::accumulate(sizes.begin(), sizes.end(), std::uint64_t{0});
    counts_ok = counts_ok && row.attention_score_count == expect;
  }
  const double patch = bench::loglog_slope(rows, "patch");
  const double canonical = bench::loglog_slope(rows, "canonical");
  return {patch <= 1.15 && canonical >= 1.7 && counts_ok,
          "patch slope " + fmt(patch) + ", canonical slope " + fmt(canonical) +
              (counts_ok ? ", score counts exact" : ", score count mismatch")};
}

Verdict parameter_claim() {
  const auto light = vsm::parameter_count(vsm::ProjectionMode::light, 321, 32, 5, 5, 1);
  const auto naive = vsm::parameter_count(vsm::ProjectionMode::naive, 321, 32, 5, 5, 1);
  const double ratio = double(light) / double(naive);
  return {light == 2545 && naive == 657408 && ratio < 0.004,
          "light " + std::to_string(light) + ", naive " + std::to_string(naive) + ", ratio " +
              fmt(100.0 * ratio) + "%"};
}

// Desk-scale runs share one dataset; results are cached by (vsm, seed).
struct DeskRun {
  double best_val_mse = 0.0;
  std::size_t epochs = 0;
};

class DeskScale {
 public:
  DeskScale() {
    const data::SeriesTable table = data::synth(base_.synth_spec());
    const TriformerConfig mc = base_.model_config(table.variables());
    const data::Splits parts = data::split(table, base_.split_spec(), mc.lookback + mc.horizon);
    const auto stats = data::fit_standardize(parts.train);
    train_.emplace(data::apply_standardize(parts.train, stats), mc.lookback, mc.horizon);
    val_.emplace(data::apply_standardize(parts.val, stats), mc.lookback, mc.horizon);
  }

  double persistence() const { return training::persistence_baseline(*val_).mse; }

  const DeskRun& run(const std::string& vsm, std::uint64_t seed) {
    const std::string key = vsm + "/" + std::to_string(seed);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    RunConfig rc = base_;
    rc.set("model.vsm", vsm);
    rc.set("model.seed", std::to_string(seed));
    Triformer model(rc.model_config(train_->variables()));
    const auto history = training::train(model, *train_, *val_, rc.train_config());
    std::cout << "  run vsm=" << vsm << " seed=" << seed << " epochs=" << history.epochs.size()
              << " best_val_mse=" << history.best.mse << std::endl;
    return cache_[key] = DeskRun{history.best.mse, history.epochs.size()};
  }

 private:
  RunConfig base_ = RunConfig::parse_text(
      "data.synth.n = 8\ndata.synth.t = 4000\ndata.synth.seed = 1\n"
      "data.synth.heterogeneity = 1\nmodel.h = 96\nmodel.f = 24\n"
      "model.patch_sizes = 6,4,4\ntrain.max_epochs = 10\n");
  std::optional<data::WindowDataset> train_;
  std::optional<data::WindowDataset> val_;
  std::map<std::string, DeskRun> cache_;
};

DeskScale& desk() {
  static DeskScale instance;
  return instance;
}

Verdict end_to_end() {
  const double baseline = desk().persistence();
  const DeskRun& run = desk().run("light", 1);
  return {run.best_val_mse < 0.5 * baseline && run.epochs <= 10,
          "best val mse " + fmt(run.best_val_mse) + " vs persistence " + fmt(baseline) +
              " (threshold " + fmt(0.5 * baseline) + ")"};
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[1];
}

Verdict memory_effect() {
  std::vector<double> light, off;
  for (std::uint64_t seed : {1, 2, 3}) {
    light.push_back(desk().run("light", seed).best_val_mse);
    off.push_back(desk().run("off", seed).best_val_mse);
  }
  const double l = median3(light), o = median3(off);
  return {l <= o, "median val mse light " + fmt(l) + ", off " + fmt(o)};
}

Verdict standardization() {
  data::SeriesTable column;
  column.columns = {"x"};
  column.rows = 3;
  column.values = {1.0, 2.0, 3.0};
  const auto [scaled, stats] = data::standardize(column);
  const double z = std::sqrt(1.5);
  double err = std::abs(scaled.values[0] + z) + std::abs(scaled.values[1]) +
               std::abs(scaled.values[2] - z);
  const bool column_ok = err < 1e-12;

  Rng rng(909);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    data::SeriesTable t;
    const std::size_t n = 1 + rng() % 6, rows = 2 + rng() % 40;
    for (std::size_t i = 0; i < n; ++i) t.columns.push_back("v" + std::to_string(i));
    t.rows = rows;
    const Tensor values = random_uniform({rows * n}, 100.0, rng);
    t.values.assign(values.data().begin(), values.data().end());
    const auto [s, st] = data::standardize(t);
    const auto back = data::destandardize(s, st);
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      worst = std::max(worst, std::abs(back.values[k] - t.values[k]));
    }
  }
  return {column_ok && worst < 1e-12,
          "[1,2,3] -> [" + fmt(scaled.values[0]) + ", " + fmt(scaled.values[1]) + ", " +
              fmt(scaled.values[2]) + "], round trip error " + fmt(worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json metric_fields(const fs::path& history) {
  nlohmann::json h = nlohmann::json::parse(slurp(history));
  nlohmann::json out;
  out["best_epoch"] = h["best_epoch"];
  out["metrics"] = h["metrics"];
  for (const auto& e : h["epochs"]) {
    out["epochs"].push_back({{"train_loss", e["train_loss"]},
                             {"val_mse", e["val_mse"]},
                             {"val_mae", e["val_mae"]}});
  }
  return out;
}

Verdict determinism(const std::string& cli) {
  if (cli.empty()) return {false, "CLI path not given"};
  const fs::path root = fs::temp_directory_path() / "triformer_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "run.cfg";
  std::ofstream(cfg) << "data.synth.n = 4\ndata.synth.t = 600\ndata.synth.seed = 7\n"
                        "model.h = 24\nmodel.f = 6\nmodel.patch_sizes = 4,3\nmodel.d = 8\n"
                        "train.lr = 1e-3\ntrain.max_epochs = 3\n";
  std::vector<std::string> metrics;
  for (const char* run : {"a", "b"}) {
    const fs::path out = root / run;
    const std::string train = "\"" + cli + "\" train -c \"" + cfg.string() + "\" -s out.dir=\"" +
                              out.string() + "\" > \"" + (root / run).string() + ".log\" 2>&1";
    if (std::system(train.c_str()) != 0) return {false, "train run " + std::string(run) + " failed"};
    const std::string eval = "\"" + cli + "\" eval -k \"" + (out / "checkpoint.trf").string() +
                             "\" -c \"" + cfg.string() + "\" -o \"" +
                             (out / "metrics.json").string() + "\" > /dev/null 2>&1";
    if (std::system(eval.c_str()) != 0) return {false, "eval run " + std::string(run) + " failed"};
    metrics.push_back(metric_fields(out / "history.json").dump() + slurp(out / "metrics.json"));
  }
  const bool same_metrics = metrics[0] == metrics[1];

  const fs::path ck = root / "a" / "checkpoint.trf";
  const Checkpoint loaded = load_checkpoint(ck.string());
  const fs::path again = root / "resaved.trf";
  save_checkpoint(again.string(), loaded);
  const RunConfig rc = RunConfig::parse_text(loaded.config_text);
  Triformer model(rc.model_config(0));
  model.load_state(loaded);
  const fs::path from_model = root / "from_model.trf";
  save_checkpoint(from_model.string(), model.save_state(loaded.config_text));
  const std::string bytes = slurp(ck);
  // The runs differ only in out.dir, which the stored config records.
  const Checkpoint other = load_checkpoint((root / "b" / "checkpoint.trf").string());
  const bool bit_exact = bytes == slurp(again) && bytes == slurp(from_model) &&
                         loaded.tensors == other.tensors;
  return {same_metrics && bit_exact,
          std::string(same_metrics ? "metric fields identical" : "metric fields differ") +
              (bit_exact ? ", checkpoint round trip bit-exact" : ", checkpoint bytes differ")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  std::string cli;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (!arg.empty() && std::all_of(arg.begin(), arg.end(), ::isdigit)) {
      selected.insert(std::stoi(arg));
    } else {
      cli = arg;
    }
  }
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"patch attention equals scalar oracle", patch_oracle},
      {"canonical attention equals scalar oracle", canonical_oracle},
      {"full-model gradient check", full_gradient},
      {"layer sizes sum below 2H", layer_bound},
      {"complexity scaling", scaling},
      {"projection parameter counts", parameter_claim},
      {"desk-scale forecast beats half of persistence", end_to_end},
      {"memory-specific projections not worse than shared", memory_effect},
      {"standardization", standardization},
      {"determinism", [&] { return determinism(cli); }},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int number = int(k) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << number << ": "
              << criteria[k].first << " (" << v.detail << ", " << fmt(secs) << " s)"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
