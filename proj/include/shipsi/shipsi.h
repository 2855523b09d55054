// Copyright 2026 The shipsi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHIPSI_SHIPSI_H_
#define SHIPSI_SHIPSI_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SHIPSI_API __declspec(dllexport)
#else
#define SHIPSI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Nonzero values match the CLI exit codes. */
typedef enum shipsi_status {
  SHIPSI_OK = 0,
  SHIPSI_INVALID_ARGUMENT = 1,
  SHIPSI_CONFIG_ERROR = 2,
  SHIPSI_DIVERGENCE = 3,
  SHIPSI_IO_ERROR = 4,
  SHIPSI_INTERNAL_ERROR = 5
} shipsi_status;

typedef enum shipsi_mode {
  SHIPSI_COURSE_KEEPING = 0,
  SHIPSI_TURNING_CIRCLE = 1
} shipsi_mode;

typedef struct shipsi_config shipsi_config;
typedef struct shipsi_model shipsi_model;

/* Progress messages; may be called from worker threads. */
typedef void (*shipsi_log_fn)(const char* message, void* user);

SHIPSI_API const char* shipsi_version(void);

/* Message of the last failure on the calling thread ("" if none). */
SHIPSI_API const char* shipsi_last_error(void);

/* Configuration. */
SHIPSI_API shipsi_status shipsi_config_default(shipsi_config** out);
SHIPSI_API shipsi_status shipsi_config_load(const char* path, shipsi_config** out);
SHIPSI_API shipsi_status shipsi_config_parse(const char* text, shipsi_config** out);
SHIPSI_API shipsi_status shipsi_config_set(shipsi_config* config, const char* key,
                                           const char* value);
/* Writes the value's text into buf (always NUL-terminated when cap > 0).
   *needed receives the length including the terminator. */
SHIPSI_API shipsi_status shipsi_config_get(const shipsi_config* config, const char* key,
                                           char* buf, size_t cap, size_t* needed);
SHIPSI_API shipsi_status shipsi_config_validate(const shipsi_config* config);
SHIPSI_API shipsi_status shipsi_config_save(const shipsi_config* config, const char* path);
SHIPSI_API void shipsi_config_free(shipsi_config* config);

/* Pipeline commands. `force` permits overwriting existing outputs. */
SHIPSI_API shipsi_status shipsi_generate(const shipsi_config* config, const char* out_dir,
                                         int force, shipsi_log_fn log, void* user);
SHIPSI_API shipsi_status shipsi_train(const shipsi_config* config, const char* dataset_dir,
                                      const char* out_dir, int force, shipsi_log_fn log,
                                      void* user);
SHIPSI_API shipsi_status shipsi_evaluate(const shipsi_config* config, const char* checkpoint,
                                         const char* dataset_dir, const char* out_dir, int force,
                                         shipsi_log_fn log, void* user);
/* kind: "convergence" or "frame-ablation". Resumes from cells already done. */
SHIPSI_API shipsi_status shipsi_study(const shipsi_config* config, const char* kind,
                                      const char* out_dir, shipsi_log_fn log, void* user);

typedef struct shipsi_predict_options {
  const char* checkpoint;
  const char* run;         /* .traj file */
  const char* waves;       /* NULL: the run path with a .waves extension */
  const char* frame;       /* NULL: frame.csv one level above the run's directory */
  int actual_frame;        /* nonzero: use the run's own track as the frame */
  size_t samples;
  uint64_t seed;
  const char* out;
  int force;
} shipsi_predict_options;

SHIPSI_API void shipsi_predict_options_init(shipsi_predict_options* options);
SHIPSI_API shipsi_status shipsi_predict(const shipsi_predict_options* options);

/* Trained models. */
typedef struct shipsi_model_info {
  size_t inputs;
  size_t outputs;
  size_t units;
  size_t layers;
  size_t steps;
  double dropout;
  shipsi_mode mode;
} shipsi_model_info;

SHIPSI_API shipsi_status shipsi_model_load(const char* path, shipsi_model** out);
SHIPSI_API shipsi_status shipsi_model_info_get(const shipsi_model* model, shipsi_model_info* info);
/* Monte Carlo dropout prediction.
   elevations: steps x inputs probe elevations in metres, row-major.
   mean, std: steps x outputs, row-major, physical units. */
SHIPSI_API shipsi_status shipsi_model_predict(const shipsi_model* model, const double* elevations,
                                              size_t steps, size_t inputs, size_t samples,
                                              uint64_t seed, double* mean, double* std);
SHIPSI_API void shipsi_model_free(shipsi_model* model);

#ifdef __cplusplus
}
#endif

#endif
