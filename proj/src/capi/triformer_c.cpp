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

#include "triformer/triformer.h"

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bench/bench.hpp"
#include "config/run_config.hpp"
#include "data/series.hpp"
#include "model/checkpoint.hpp"
#include "model/triformer.hpp"
#include "tensor/error.hpp"
#include "training/trainer.hpp"
#include "vsm/vsm.hpp"

using namespace triformer;

struct trf_config {
  RunConfig cfg;
};

struct trf_table {
  data::SeriesTable table;
};

struct trf_dataset {
  data::StandardizeStats stats;
  std::optional<data::WindowDataset> train;
  std::optional<data::WindowDataset> val;
  std::optional<data::WindowDataset> test;
};

struct trf_model {
  RunConfig cfg;
  std::unique_ptr<Triformer> model;
};

struct trf_history {
  training::RunHistory history;
};

struct trf_bench {
  std::vector<bench::BenchRow> rows;
};

namespace {

thread_local std::string g_last_error;

trf_status fail(trf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
trf_status guarded(Fn&& fn) {
  try {
    fn();
    return TRF_OK;
  } catch (const ConfigError& e) {
    return fail(TRF_ERR_CONFIG, e.what());
  } catch (const DataError& e) {
    return fail(TRF_ERR_DATA, e.what());
  } catch (const NumericError& e) {
    return fail(TRF_ERR_NUMERIC, e.what());
  } catch (const IoError& e) {
    return fail(TRF_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TRF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TRF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TRF_ERR_INTERNAL, "unknown error");
  }
}

#define TRF_REQUIRE(cond)                                             \
  do {                                                                \
    if (!(cond)) return fail(TRF_ERR_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

const data::WindowDataset& pick(const trf_dataset* ds, trf_split split) {
  switch (split) {
    case TRF_SPLIT_TRAIN: return *ds->train;
    case TRF_SPLIT_VAL: return *ds->val;
    case TRF_SPLIT_TEST: return *ds->test;
  }
  throw ConfigError("unknown split");
}

Checkpoint make_checkpoint(const trf_model& m) { return m.model->save_state(m.cfg.to_text()); }

}  // namespace

extern "C" {

const char* trf_version(void) { return "1.0.0"; }

const char* trf_last_error(void) { return g_last_error.c_str(); }

trf_status trf_config_new(trf_config** out) {
  TRF_REQUIRE(out);
  return guarded([&] { *out = new trf_config{}; });
}

trf_status trf_config_load(const char* path, trf_config** out) {
  TRF_REQUIRE(path && out);
  return guarded([&] { *out = new trf_config{RunConfig::load(path)}; });
}

trf_status trf_config_parse(const char* text, trf_config** out) {
  TRF_REQUIRE(text && out);
  return guarded([&] { *out = new trf_config{RunConfig::parse_text(text)}; });
}

trf_status trf_config_set(trf_config* cfg, const char* key, const char* value) {
  TRF_REQUIRE(cfg && key && value);
  return guarded([&] { cfg->cfg.set(key, value); });
}

trf_status trf_config_apply(trf_config* cfg, const char* assignment) {
  TRF_REQUIRE(cfg && assignment);
  return guarded([&] { cfg->cfg.set_assignment(assignment); });
}

trf_status trf_config_get(const trf_config* cfg, const char* key, const char** value) {
  TRF_REQUIRE(cfg && key && value);
  return guarded([&] { *value = cfg->cfg.get(key).c_str(); });
}

trf_status trf_config_merge(trf_config* dst, const trf_config* src, const char* prefix) {
  TRF_REQUIRE(dst && src && prefix);
  return guarded([&] {
    const std::string pre(prefix);
    for (const auto& [k, v] : src->cfg.values()) {
      if (k.rfind(pre, 0) == 0 && src->cfg.is_set_explicitly(k)) dst->cfg.set(k, v);
    }
  });
}

trf_status trf_config_write(const trf_config* cfg, const char* path) {
  TRF_REQUIRE(cfg && path);
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw IoError(std::string("cannot open '") + path + "' for writing");
    out << cfg->cfg.to_text();
    if (!out) throw IoError(std::string("failed writing '") + path + "'");
  });
}

void trf_config_free(trf_config* cfg) { delete cfg; }

trf_status trf_table_load_csv(const char* path, trf_table** out) {
  TRF_REQUIRE(path && out);
  return guarded([&] { *out = new trf_table{data::load_csv(path)}; });
}

trf_status trf_table_synth(size_t variables, size_t rows, uint64_t seed, double heterogeneity,
                           trf_table** out) {
  TRF_REQUIRE(out);
  return guarded([&] {
    data::SynthSpec spec;
    spec.variables = variables;
    spec.rows = rows;
    spec.seed = seed;
    spec.heterogeneity = heterogeneity;
    *out = new trf_table{data::synth(spec)};
  });
}

trf_status trf_table_save_csv(const trf_table* table, const char* path) {
  TRF_REQUIRE(table && path);
  return guarded([&] { data::save_csv(path, table->table); });
}

size_t trf_table_rows(const trf_table* table) { return table ? table->table.rows : 0; }

size_t trf_table_variables(const trf_table* table) {
  return table ? table->table.variables() : 0;
}

const double* trf_table_values(const trf_table* table) {
  return table ? table->table.values.data() : nullptr;
}

void trf_table_free(trf_table* table) { delete table; }

trf_status trf_dataset_open(const trf_config* cfg, trf_dataset** out) {
  TRF_REQUIRE(cfg && out);
  return guarded([&] {
    const RunConfig& rc = cfg->cfg;
    const data::SeriesTable table =
        rc.uses_synthetic_data() ? data::synth(rc.synth_spec()) : data::load_csv(rc.get("data.path"));
    const TriformerConfig mc = rc.model_config(table.variables());
    const data::Splits parts = data::split(table, rc.split_spec(), mc.lookback + mc.horizon);
    auto ds = std::make_unique<trf_dataset>();
    ds->stats = data::fit_standardize(parts.train);
    ds->train.emplace(data::apply_standardize(parts.train, ds->stats), mc.lookback, mc.horizon);
    ds->val.emplace(data::apply_standardize(parts.val, ds->stats), mc.lookback, mc.horizon);
    ds->test.emplace(data::apply_standardize(parts.test, ds->stats), mc.lookback, mc.horizon);
    *out = ds.release();
  });
}

size_t trf_dataset_variables(const trf_dataset* ds) { return ds ? ds->train->variables() : 0; }

size_t trf_dataset_windows(const trf_dataset* ds, trf_split split) {
  if (!ds) return 0;
  try {
    return pick(ds, split).size();
  } catch (...) {
    return 0;
  }
}

void trf_dataset_free(trf_dataset* ds) { delete ds; }

trf_status trf_model_create(const trf_config* cfg, size_t variables, trf_model** out) {
  TRF_REQUIRE(cfg && out);
  return guarded([&] {
    auto m = std::make_unique<trf_model>();
    m->cfg = cfg->cfg;
    const TriformerConfig mc = m->cfg.model_config(variables);
    m->cfg.set("model.n", std::to_string(mc.variables));
    m->model = std::make_unique<Triformer>(mc);
    *out = m.release();
  });
}

trf_status trf_model_load(const char* checkpoint_path, trf_model** out) {
  TRF_REQUIRE(checkpoint_path && out);
  return guarded([&] {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    auto m = std::make_unique<trf_model>();
    m->cfg = RunConfig::parse_text(ck.config_text);
    m->model = std::make_unique<Triformer>(m->cfg.model_config(0));
    m->model->load_state(ck);
    *out = m.release();
  });
}

trf_status trf_model_save(const trf_model* model, const char* checkpoint_path) {
  TRF_REQUIRE(model && checkpoint_path);
  return guarded([&] { save_checkpoint(checkpoint_path, make_checkpoint(*model)); });
}

trf_status trf_model_config(const trf_model* model, trf_config** out) {
  TRF_REQUIRE(model && out);
  return guarded([&] { *out = new trf_config{model->cfg}; });
}

size_t trf_model_variables(const trf_model* model) {
  return model ? model->model->config().variables : 0;
}

size_t trf_model_lookback(const trf_model* model) {
  return model ? model->model->config().lookback : 0;
}

size_t trf_model_horizon(const trf_model* model) {
  return model ? model->model->config().horizon : 0;
}

size_t trf_model_parameter_count(const trf_model* model) {
  return model ? model->model->parameter_count() : 0;
}

trf_status trf_model_forward(const trf_model* model, const double* input, size_t batch,
                             double* output) {
  TRF_REQUIRE(model && input && output && batch > 0);
  return guarded([&] {
    const TriformerConfig& c = model->model->config();
    const std::size_t in_n = batch * c.variables * c.lookback;
    Tensor x({batch, c.variables, c.lookback}, std::vector<double>(input, input + in_n));
    const Tensor y = model->model->predict(x);
    std::copy(y.data().begin(), y.data().end(), output);
  });
}

trf_status trf_model_memories(const trf_model* model, const double** values, size_t* rows,
                              size_t* cols) {
  TRF_REQUIRE(model && values && rows && cols);
  const vsm::VariableMemory* mem = model->model->memory();
  if (!mem) return fail(TRF_ERR_CONFIG, "no memories in checkpoint");
  *values = mem->memories.value().raw();
  *rows = mem->variables();
  *cols = mem->width();
  return TRF_OK;
}

trf_status trf_model_export_memories(const trf_model* model, const char* csv_path) {
  TRF_REQUIRE(model && csv_path);
  const vsm::VariableMemory* mem = model->model->memory();
  if (!mem) return fail(TRF_ERR_CONFIG, "no memories in checkpoint");
  return guarded([&] {
    std::ofstream out(csv_path);
    if (!out) throw IoError(std::string("cannot open '") + csv_path + "' for writing");
    vsm::write_memories_csv(out, mem->memories.value());
    if (!out) throw IoError(std::string("failed writing '") + csv_path + "'");
  });
}

void trf_model_free(trf_model* model) { delete model; }

trf_status trf_train(trf_model* model, const trf_dataset* ds, const trf_config* cfg,
                     trf_history** out) {
  TRF_REQUIRE(model && ds && cfg && out);
  return guarded([&] {
    if (ds->train->variables() != model->model->config().variables) {
      throw ShapeError("model expects " + std::to_string(model->model->config().variables) +
                       " variables, data has " + std::to_string(ds->train->variables()));
    }
    auto h = std::make_unique<trf_history>();
    h->history = training::train(*model->model, *ds->train, *ds->val, cfg->cfg.train_config());
    *out = h.release();
  });
}

size_t trf_history_epochs(const trf_history* history) {
  return history ? history->history.epochs.size() : 0;
}

trf_status trf_history_epoch(const trf_history* history, size_t index, double* train_loss,
                             trf_metrics* val) {
  TRF_REQUIRE(history && index < history->history.epochs.size());
  const training::EpochRecord& e = history->history.epochs[index];
  if (train_loss) *train_loss = e.train_loss;
  if (val) *val = trf_metrics{e.val_mse, e.val_mae};
  return TRF_OK;
}

trf_status trf_history_best(const trf_history* history, size_t* best_epoch, trf_metrics* best) {
  TRF_REQUIRE(history);
  if (best_epoch) *best_epoch = history->history.best_epoch;
  if (best) *best = trf_metrics{history->history.best.mse, history->history.best.mae};
  return TRF_OK;
}

trf_status trf_history_set_checkpoint(trf_history* history, const char* path) {
  TRF_REQUIRE(history && path);
  history->history.checkpoint_path = path;
  return TRF_OK;
}

trf_status trf_history_write_json(const trf_history* history, const char* path) {
  TRF_REQUIRE(history && path);
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw IoError(std::string("cannot open '") + path + "' for writing");
    out << training::history_to_json(history->history);
    if (!out) throw IoError(std::string("failed writing '") + path + "'");
  });
}

void trf_history_free(trf_history* history) { delete history; }

trf_status trf_evaluate(const trf_model* model, const trf_dataset* ds, trf_split split,
                        trf_metrics* out) {
  TRF_REQUIRE(model && ds && out);
  return guarded([&] {
    const data::WindowDataset& w = pick(ds, split);
    const TriformerConfig& c = model->model->config();
    if (w.variables() != c.variables || w.lookback() != c.lookback || w.horizon() != c.horizon) {
      throw ShapeError("checkpoint expects N=" + std::to_string(c.variables) + ", H=" +
                       std::to_string(c.lookback) + ", F=" + std::to_string(c.horizon) +
                       " but data has N=" + std::to_string(w.variables()) + ", H=" +
                       std::to_string(w.lookback()) + ", F=" + std::to_string(w.horizon()));
    }
    const training::Metrics m = training::evaluate(*model->model, w);
    *out = trf_metrics{m.mse, m.mae};
  });
}

trf_status trf_persistence(const trf_dataset* ds, trf_split split, trf_metrics* out) {
  TRF_REQUIRE(ds && out);
  return guarded([&] {
    const training::Metrics m = training::persistence_baseline(pick(ds, split));
    *out = trf_metrics{m.mse, m.mae};
  });
}

trf_status trf_validate_patches(size_t lookback, const size_t* patches, size_t count,
                                size_t* layer_sizes_out) {
  TRF_REQUIRE(patches || count == 0);
  return guarded([&] {
    const std::vector<std::size_t> sizes =
        layer_sizes(lookback, std::vector<std::size_t>(patches, patches + count));
    if (layer_sizes_out) std::copy(sizes.begin(), sizes.end(), layer_sizes_out);
  });
}

trf_status trf_complexity_probe(const trf_config* cfg, size_t variables,
                                uint64_t* attention_score_count, uint64_t* total_flop_estimate) {
  TRF_REQUIRE(cfg);
  return guarded([&] {
    const ComplexityEstimate e = complexity_probe(cfg->cfg.model_config(variables));
    if (attention_score_count) *attention_score_count = e.attention_score_count;
    if (total_flop_estimate) *total_flop_estimate = e.total_flop_estimate;
  });
}

trf_status trf_parameter_count(trf_projection_mode mode, uint64_t variables, uint64_t d,
                               uint64_t memory_width, uint64_t middle, uint64_t layers,
                               uint64_t* out) {
  TRF_REQUIRE(out && variables && d && memory_width && middle && layers);
  return guarded([&] {
    vsm::ProjectionMode m;
    switch (mode) {
      case TRF_PROJECTION_AGNOSTIC: m = vsm::ProjectionMode::agnostic; break;
      case TRF_PROJECTION_NAIVE: m = vsm::ProjectionMode::naive; break;
      case TRF_PROJECTION_LIGHT: m = vsm::ProjectionMode::light; break;
      default: throw ConfigError("unknown projection mode");
    }
    *out = vsm::parameter_count(m, variables, d, memory_width, middle, layers);
  });
}

trf_status trf_bench_run(const size_t* lookbacks, size_t count, size_t variables, size_t hidden,
                         size_t repetitions, trf_bench** out) {
  TRF_REQUIRE(lookbacks && count > 0 && variables > 0 && hidden > 0 && out);
  return guarded([&] {
    bench::BenchOptions opt;
    opt.lookbacks.assign(lookbacks, lookbacks + count);
    opt.variables = variables;
    opt.hidden = hidden;
    opt.repetitions = repetitions;
    for (std::size_t h : opt.lookbacks) bench::depth_policy_patches(h);
    *out = new trf_bench{bench::run_bench(opt)};
  });
}

size_t trf_bench_rows(const trf_bench* bench) { return bench ? bench->rows.size() : 0; }

trf_status trf_bench_row(const trf_bench* bench, size_t index, size_t* lookback,
                         const char** mechanism, double* median_seconds,
                         uint64_t* attention_score_count) {
  TRF_REQUIRE(bench && index < bench->rows.size());
  const bench::BenchRow& r = bench->rows[index];
  if (lookback) *lookback = r.lookback;
  if (mechanism) *mechanism = r.mechanism.c_str();
  if (median_seconds) *median_seconds = r.median_seconds;
  if (attention_score_count) *attention_score_count = r.attention_score_count;
  return TRF_OK;
}

trf_status trf_bench_slope(const trf_bench* bench, const char* mechanism, double* slope) {
  TRF_REQUIRE(bench && mechanism && slope);
  return guarded([&] { *slope = bench::loglog_slope(bench->rows, mechanism); });
}

trf_status trf_bench_write_csv(const trf_bench* bench, const char* path) {
  TRF_REQUIRE(bench && path);
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw IoError(std::string("cannot open '") + path + "' for writing");
    bench::write_bench_csv(out, bench->rows);
  });
}

void trf_bench_free(trf_bench* bench) { delete bench; }

}  // extern "C"
