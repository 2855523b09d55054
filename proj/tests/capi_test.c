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

/* Exercises the public C header from plain C. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "shipsi/shipsi.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void quiet(const char* msg, void* user) {
  (void)msg;
  ++*(int*)user;
}

int main(int argc, char** argv) {
  const char* root = argc > 1 ? argv[1] : "/tmp/shipsi_capi";
  char out[512], data[512], model_dir[512], ckpt[512], run[512], pred[512];
  snprintf(out, sizeof out, "%s/gen", root);
  snprintf(data, sizeof data, "%s/gen/dataset", root);
  snprintf(model_dir, sizeof model_dir, "%s/model", root);
  snprintf(ckpt, sizeof ckpt, "%s/model/model.ckpt", root);
  snprintf(run, sizeof run, "%s/gen/runs/run_0002.traj", root);
  snprintf(pred, sizeof pred, "%s/pred.txt", root);

  shipsi_config* cfg = NULL;
  EXPECT(shipsi_config_default(&cfg) == SHIPSI_OK);
  EXPECT(shipsi_config_set(cfg, "run.mode", "zigzag") == SHIPSI_CONFIG_ERROR);
  EXPECT(strstr(shipsi_last_error(), "run.mode") != NULL);
  EXPECT(shipsi_config_set(cfg, "no.such.key", "1") == SHIPSI_CONFIG_ERROR);
  EXPECT(shipsi_config_set(NULL, "run.mode", "x") == SHIPSI_INVALID_ARGUMENT);

  const char* overrides[][2] = {{"data.train_runs", "2"}, {"data.validation_runs", "1"},
                                {"run.duration", "20"},   {"probes.count", "3"},
                                {"net.units", "4"},       {"net.layers", "2"},
                                {"net.epochs", "2"},      {"spectrum.components", "50"}};
  for (size_t i = 0; i < sizeof overrides / sizeof overrides[0]; ++i) {
    EXPECT(shipsi_config_set(cfg, overrides[i][0], overrides[i][1]) == SHIPSI_OK);
  }
  char buf[8];
  size_t needed = 0;
  EXPECT(shipsi_config_get(cfg, "net.units", buf, sizeof buf, &needed) == SHIPSI_OK);
  EXPECT(strcmp(buf, "4") == 0 && needed == 2);
  EXPECT(shipsi_config_get(cfg, "spectrum.significant_wave_height", buf, 3, &needed) == SHIPSI_OK);
  EXPECT(strlen(buf) == 2 && needed > 3);
  EXPECT(shipsi_config_validate(cfg) == SHIPSI_OK);

  int messages = 0;
  EXPECT(shipsi_generate(cfg, out, 1, quiet, &messages) == SHIPSI_OK);
  EXPECT(messages > 0);
  EXPECT(shipsi_generate(cfg, out, 0, NULL, NULL) == SHIPSI_IO_ERROR);
  EXPECT(shipsi_train(cfg, data, model_dir, 1, NULL, NULL) == SHIPSI_OK);

  shipsi_model* model = NULL;
  EXPECT(shipsi_model_load("/nonexistent.ckpt", &model) == SHIPSI_IO_ERROR);
  EXPECT(shipsi_model_load(ckpt, &model) == SHIPSI_OK);
  shipsi_model_info info;
  EXPECT(shipsi_model_info_get(model, &info) == SHIPSI_OK);
  EXPECT(info.inputs == 3 && info.outputs == 6 && info.units == 4 && info.layers == 2);
  EXPECT(info.steps == 40 && info.mode == SHIPSI_COURSE_KEEPING);

  double elev[40 * 3], mean[40 * 6], sd[40 * 6];
  for (int i = 0; i < 120; ++i) elev[i] = sin(0.1 * i);
  EXPECT(shipsi_model_predict(model, elev, 40, 3, 1, 9, mean, sd) == SHIPSI_OK);
  double max_sd = 0.0;
  for (int i = 0; i < 240; ++i) max_sd = fmax(max_sd, fabs(sd[i]));
  EXPECT(max_sd == 0.0);
  EXPECT(shipsi_model_predict(model, elev, 40, 3, 20, 9, mean, sd) == SHIPSI_OK);
  for (int i = 0; i < 240; ++i) max_sd = fmax(max_sd, fabs(sd[i]));
  EXPECT(max_sd > 0.0);
  EXPECT(shipsi_model_predict(model, elev, 40, 2, 5, 9, mean, sd) == SHIPSI_INVALID_ARGUMENT);
  shipsi_model_free(model);

  shipsi_predict_options po;
  shipsi_predict_options_init(&po);
  EXPECT(po.samples == 100);
  po.checkpoint = ckpt;
  po.run = run;
  po.samples = 3;
  po.out = pred;
  po.force = 1;
  EXPECT(shipsi_predict(&po) == SHIPSI_OK);
  po.force = 0;
  EXPECT(shipsi_predict(&po) == SHIPSI_IO_ERROR);

  EXPECT(shipsi_study(cfg, "sweep", root, NULL, NULL) == SHIPSI_INVALID_ARGUMENT);

  shipsi_config_free(cfg);
  shipsi_config_free(NULL);
  shipsi_model_free(NULL);
  EXPECT(shipsi_version()[0] != '\0');

  if (failures) fprintf(stderr, "%d C API check(s) failed\n", failures);
  else printf("C API checks passed\n");
  return failures ? 1 : 0;
}
