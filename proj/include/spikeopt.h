/*
 * Copyright 2026 The spikeopt Authors
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

#ifndef SPIKEOPT_H
#define SPIKEOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SPK_BUILDING_LIBRARY)
#define SPK_API __declspec(dllexport)
#else
#define SPK_API __declspec(dllimport)
#endif
#else
#define SPK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes for the command-line tool. */
typedef enum spk_status {
  SPK_OK = 0,
  SPK_ERR_CONFIG = 2,   /* bad configuration, parameter out of range, invalid graph */
  SPK_ERR_IO = 3,       /* unreadable, missing or malformed files */
  SPK_ERR_INTERNAL = 4  /* numeric failure or bug */
} spk_status;

typedef struct spk_dataset spk_dataset;
typedef struct spk_config spk_config;
typedef struct spk_result spk_result;
typedef struct spk_search spk_search;

/* Message for the last failing call on this thread; never NULL. */
SPK_API const char* spk_last_error(void);
/* Symbolic kind of the last failure, e.g. "RangeError". */
SPK_API const char* spk_last_error_kind(void);
SPK_API const char* spk_version(void);
/* Strings returned through char** out-parameters are released here. */
SPK_API void spk_string_free(char* s);

/* ---- datasets ---- */

/* MNIST in IDX layout (train-* / t10k-*, optionally gzipped). */
SPK_API spk_status spk_dataset_load_mnist(const char* dir, spk_dataset** out);
/* Separable synthetic classes; `eval_samples` of the `samples` form the
   evaluation pool. */
SPK_API spk_status spk_dataset_synthetic(uint32_t classes, uint32_t width, uint64_t samples,
                                         uint64_t eval_samples, double noise, uint64_t seed,
                                         spk_dataset** out);
SPK_API void spk_dataset_free(spk_dataset* d);
SPK_API uint64_t spk_dataset_width(const spk_dataset* d);
SPK_API uint64_t spk_dataset_classes(const spk_dataset* d);
SPK_API uint64_t spk_dataset_learn_pool(const spk_dataset* d);
SPK_API uint64_t spk_dataset_eval_pool(const spk_dataset* d);
SPK_API const char* spk_dataset_source(const spk_dataset* d);

/* ---- task settings ---- */

typedef struct spk_task_settings {
  uint64_t learn_samples;
  uint64_t eval_samples;
  uint32_t steps_per_sample;
  uint32_t eval_steps_per_sample; /* 0: same as steps_per_sample */
  int inter_sample_reset;
  int unsupervised;
  uint64_t seed;
  double encoder_gain;
  uint32_t kenyon_cells;          /* complex case expansion width */
} spk_task_settings;

SPK_API void spk_task_settings_default(spk_task_settings* s);

/* ---- network configurations ---- */

/* Built-in reference configuration of "shallow" or "complex". */
SPK_API spk_status spk_config_default(const char* case_name, spk_config** out);
/* Flat "key = value" text; every design-space key of the case is required,
   unknown keys are errors. */
SPK_API spk_status spk_config_parse(const char* case_name, const char* text, spk_config** out);
SPK_API spk_status spk_config_load(const char* case_name, const char* path, spk_config** out);
SPK_API spk_status spk_config_set(spk_config* c, const char* key, const char* value);
SPK_API spk_status spk_config_to_text(const spk_config* c, char** out);
SPK_API const char* spk_config_case(const spk_config* c);
SPK_API void spk_config_free(spk_config* c);

/* ---- single evaluations ---- */

SPK_API spk_status spk_evaluate(const spk_config* c, const spk_dataset* d, const spk_task_settings* s,
                                spk_result** out);
SPK_API double spk_result_accuracy(const spk_result* r);
SPK_API double spk_result_metric(const spk_result* r);
SPK_API double spk_result_wall_time(const spk_result* r);
SPK_API spk_status spk_result_to_text(const spk_result* r, char** out);
SPK_API spk_status spk_result_confusion_csv(const spk_result* r, char** out);
SPK_API void spk_result_free(spk_result* r);

/* ---- search ---- */

typedef struct spk_search_settings {
  uint64_t budget;
  uint32_t workers;
  uint64_t seed;
  uint32_t n_trees;
  uint32_t min_leaf;
  uint32_t init_random;    /* 0: max(16, 2 * dimensions) */
  uint32_t n_candidates;
  double kappa;
  uint32_t fixed_lag;      /* 0: fully asynchronous */
  uint64_t stop_after;     /* 0: run to completion; otherwise stop dispatching after N */
  int random_only;
  int bipolar;             /* learned-synapse bound mode for every evaluation */
} spk_search_settings;

SPK_API void spk_search_settings_default(spk_search_settings* s);

/* Called on the coordinator thread after each completed evaluation.
   status: 1 done, 2 failed. */
typedef void (*spk_progress_fn)(void* user, uint64_t sequence, int status, double objective);

/* Writes results.csv, checkpoint.json and, once anything succeeded,
   best_config.txt into out_dir. `dataset_args` is stored verbatim in the
   checkpoint so a resume can reload the same data. */
SPK_API spk_status spk_search_run(const char* case_name, const spk_dataset* d, const char* dataset_args,
                                  const spk_task_settings* task, const spk_search_settings* settings,
                                  const char* out_dir, spk_progress_fn progress, void* user,
                                  spk_search** out);
/* Continues the search checkpointed in out_dir. `workers` and `stop_after`
   override the stored values when non-zero. */
SPK_API spk_status spk_search_resume(const char* out_dir, const spk_dataset* d, uint32_t workers,
                                     uint64_t stop_after, spk_progress_fn progress, void* user,
                                     spk_search** out);
/* Value stored in a checkpoint's metadata (e.g. "case", "dataset"). */
SPK_API spk_status spk_checkpoint_get(const char* out_dir, const char* key, char** out);
/* Asks every running search in the process to stop dispatching; safe to
   call from a signal handler. */
SPK_API void spk_request_cancel(void);
SPK_API void spk_clear_cancel(void);

SPK_API uint64_t spk_search_records(const spk_search* s);
SPK_API uint64_t spk_search_done(const spk_search* s);
SPK_API uint64_t spk_search_failed(const spk_search* s);
SPK_API int spk_search_complete(const spk_search* s);
/* Returns 0 when no evaluation succeeded. */
SPK_API int spk_search_best(const spk_search* s, uint64_t* sequence, double* objective);
SPK_API spk_status spk_search_best_config(const spk_search* s, spk_config** out);
SPK_API void spk_search_free(spk_search* s);

/* ---- reports ---- */

/* Scatter, histogram (bin width 0.02) and best-so-far trajectory as CSV and
   SVG files in out_dir. */
SPK_API spk_status spk_report(const char* results_csv, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* SPIKEOPT_H */
