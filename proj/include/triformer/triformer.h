/* Copyright 2026 The Triformer Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the Triformer forecasting engine.
 *
 * Every object is an opaque handle created by a trf_*_new/_load/_open/_create
 * call and released with the matching trf_*_free. Functions report failure
 * through trf_status; trf_last_error() returns a human readable message for
 * the most recent failure on the calling thread. Handles are not thread-safe;
 * separate handles may be used from separate threads.
 */
#ifndef TRIFORMER_TRIFORMER_H_
#define TRIFORMER_TRIFORMER_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TRIFORMER_BUILDING)
#    define TRF_API __declspec(dllexport)
#  else
#    define TRF_API __declspec(dllimport)
#  endif
#else
#  define TRF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum trf_status {
  TRF_OK = 0,
  TRF_ERR_ARGUMENT = 1, /* null handle or out-of-range argument */
  TRF_ERR_CONFIG = 2,   /* invalid configuration or shape mismatch */
  TRF_ERR_DATA = 3,     /* unreadable or unusable input data */
  TRF_ERR_NUMERIC = 4,  /* NaN/Inf during computation */
  TRF_ERR_IO = 5,       /* file could not be read or written */
  TRF_ERR_INTERNAL = 6
} trf_status;

typedef enum trf_split { TRF_SPLIT_TRAIN = 0, TRF_SPLIT_VAL = 1, TRF_SPLIT_TEST = 2 } trf_split;

typedef enum trf_projection_mode {
  TRF_PROJECTION_AGNOSTIC = 0,
  TRF_PROJECTION_NAIVE = 1,
  TRF_PROJECTION_LIGHT = 2
} trf_projection_mode;

typedef struct trf_metrics {
  double mse;
  double mae;
} trf_metrics;

typedef struct trf_config trf_config;
typedef struct trf_table trf_table;
typedef struct trf_dataset trf_dataset;
typedef struct trf_model trf_model;
typedef struct trf_history trf_history;
typedef struct trf_bench trf_bench;

TRF_API const char* trf_version(void);
TRF_API const char* trf_last_error(void);

/* Run configuration: flat `key = value` lines, unknown keys rejected. */
TRF_API trf_status trf_config_new(trf_config** out);
TRF_API trf_status trf_config_load(const char* path, trf_config** out);
TRF_API trf_status trf_config_parse(const char* text, trf_config** out);
TRF_API trf_status trf_config_set(trf_config* cfg, const char* key, const char* value);
/* Applies a single "key=value" override. */
TRF_API trf_status trf_config_apply(trf_config* cfg, const char* assignment);
/* The returned string stays valid until the key is changed or cfg is freed. */
TRF_API trf_status trf_config_get(const trf_config* cfg, const char* key, const char** value);
/* Copies keys starting with `prefix` that were explicitly set in src. */
TRF_API trf_status trf_config_merge(trf_config* dst, const trf_config* src, const char* prefix);
TRF_API trf_status trf_config_write(const trf_config* cfg, const char* path);
TRF_API void trf_config_free(trf_config* cfg);

/* Tables of T rows by N variables. */
TRF_API trf_status trf_table_load_csv(const char* path, trf_table** out);
TRF_API trf_status trf_table_synth(size_t variables, size_t rows, uint64_t seed,
                                   double heterogeneity, trf_table** out);
TRF_API trf_status trf_table_save_csv(const trf_table* table, const char* path);
TRF_API size_t trf_table_rows(const trf_table* table);
TRF_API size_t trf_table_variables(const trf_table* table);
/* Row-major T x N view, valid while the table lives. */
TRF_API const double* trf_table_values(const trf_table* table);
TRF_API void trf_table_free(trf_table* table);

/* The data source named by a config (data.path or data.synth.*), split
 * chronologically and standardized with training-segment statistics, cut
 * into windows of model.h inputs and model.f targets. */
TRF_API trf_status trf_dataset_open(const trf_config* cfg, trf_dataset** out);
TRF_API size_t trf_dataset_variables(const trf_dataset* ds);
TRF_API size_t trf_dataset_windows(const trf_dataset* ds, trf_split split);
TRF_API void trf_dataset_free(trf_dataset* ds);

/* Models. A model remembers the config it was built from, with model.n
 * filled in; checkpoints embed that config. */
TRF_API trf_status trf_model_create(const trf_config* cfg, size_t variables, trf_model** out);
TRF_API trf_status trf_model_load(const char* checkpoint_path, trf_model** out);
TRF_API trf_status trf_model_save(const trf_model* model, const char* checkpoint_path);
TRF_API trf_status trf_model_config(const trf_model* model, trf_config** out);
TRF_API size_t trf_model_variables(const trf_model* model);
TRF_API size_t trf_model_lookback(const trf_model* model);
TRF_API size_t trf_model_horizon(const trf_model* model);
TRF_API size_t trf_model_parameter_count(const trf_model* model);
/* input: batch x N x H, output: batch x N x F, both row-major. */
TRF_API trf_status trf_model_forward(const trf_model* model, const double* input, size_t batch,
                                     double* output);
/* N x m view of the variable memories; TRF_ERR_CONFIG when the model has none. */
TRF_API trf_status trf_model_memories(const trf_model* model, const double** values,
                                      size_t* rows, size_t* cols);
TRF_API trf_status trf_model_export_memories(const trf_model* model, const char* csv_path);
TRF_API void trf_model_free(trf_model* model);

/* Training and evaluation. */
TRF_API trf_status trf_train(trf_model* model, const trf_dataset* ds, const trf_config* cfg,
                             trf_history** out);
TRF_API size_t trf_history_epochs(const trf_history* history);
TRF_API trf_status trf_history_epoch(const trf_history* history, size_t index,
                                     double* train_loss, trf_metrics* val);
TRF_API trf_status trf_history_best(const trf_history* history, size_t* best_epoch,
                                    trf_metrics* best);
TRF_API trf_status trf_history_set_checkpoint(trf_history* history, const char* path);
TRF_API trf_status trf_history_write_json(const trf_history* history, const char* path);
TRF_API void trf_history_free(trf_history* history);

TRF_API trf_status trf_evaluate(const trf_model* model, const trf_dataset* ds, trf_split split,
                                trf_metrics* out);
TRF_API trf_status trf_persistence(const trf_dataset* ds, trf_split split, trf_metrics* out);

/* Structural analysis. */
TRF_API trf_status trf_validate_patches(size_t lookback, const size_t* patches, size_t count,
                                        size_t* layer_sizes);
TRF_API trf_status trf_complexity_probe(const trf_config* cfg, size_t variables,
                                        uint64_t* attention_score_count,
                                        uint64_t* total_flop_estimate);
TRF_API trf_status trf_parameter_count(trf_projection_mode mode, uint64_t variables, uint64_t d,
                                       uint64_t memory_width, uint64_t middle, uint64_t layers,
                                       uint64_t* out);

/* Forward-pass timing of patch vs canonical attention. */
TRF_API trf_status trf_bench_run(const size_t* lookbacks, size_t count, size_t variables,
                                 size_t hidden, size_t repetitions, trf_bench** out);
TRF_API size_t trf_bench_rows(const trf_bench* bench);
TRF_API trf_status trf_bench_row(const trf_bench* bench, size_t index, size_t* lookback,
                                 const char** mechanism, double* median_seconds,
                                 uint64_t* attention_score_count);
TRF_API trf_status trf_bench_slope(const trf_bench* bench, const char* mechanism, double* slope);
TRF_API trf_status trf_bench_write_csv(const trf_bench* bench, const char* path);
TRF_API void trf_bench_free(trf_bench* bench);

#ifdef __cplusplus
}
#endif

#endif /* TRIFORMER_TRIFORMER_H_ */
