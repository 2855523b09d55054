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

#include "shipsi/shipsi.h"

#include <cstring>
#include <algorithm>
#include <exception>
#include <fstream>
#include <mutex>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "core/checkpoint.hpp"
#include "core/error.hpp"
#include "core/pipeline.hpp"

struct shipsi_config {
  shipsi::ExperimentConfig value;
};

struct shipsi_model {
  shipsi::LstmModel value;
};

namespace {

thread_local std::string last_error;

shipsi_status fail(shipsi_status status, const char* what) {
  last_error = what;
  return status;
}

// Maps exceptions to status codes; nothing escapes the C boundary.
template <typename Fn>
shipsi_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return SHIPSI_OK;
  } catch (const shipsi::Error& e) {
    return fail(static_cast<shipsi_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SHIPSI_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(SHIPSI_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(SHIPSI_INTERNAL_ERROR, "unknown failure");
  }
}

void require(const void* p, const char* name) {
  if (!p) throw shipsi::InvalidArgument(std::string(name) + " must not be NULL");
}

shipsi::Logger logger(shipsi_log_fn fn, void* user) {
  if (!fn) return {};
  auto mutex = std::make_shared<std::mutex>();
  return [fn, user, mutex](const std::string& msg) {
    std::lock_guard<std::mutex> lock(*mutex);
    fn(msg.c_str(), user);
  };
}

}  // namespace

extern "C" {

const char* shipsi_version(void) { return "1.0.0"; }

const char* shipsi_last_error(void) { return last_error.c_str(); }

shipsi_status shipsi_config_default(shipsi_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new shipsi_config{};
  });
}

shipsi_status shipsi_config_load(const char* path, shipsi_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new shipsi_config{shipsi::load_config(path)};
  });
}

shipsi_status shipsi_config_parse(const char* text, shipsi_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    std::istringstream in(text);
    *out = new shipsi_config{shipsi::parse_config(in)};
  });
}

shipsi_status shipsi_config_set(shipsi_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    shipsi::set_config_value(config->value, key, value);
  });
}

shipsi_status shipsi_config_get(const shipsi_config* config, const char* key, char* buf,
                                size_t cap, size_t* needed) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    const std::string v = shipsi::get_config_value(config->value, key);
    if (needed) *needed = v.size() + 1;
    if (buf && cap > 0) {
      const std::size_t n = std::min(cap - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
  });
}

shipsi_status shipsi_config_validate(const shipsi_config* config) {
  return guarded([&] {
    require(config, "config");
    config->value.validate();
  });
}

shipsi_status shipsi_config_save(const shipsi_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw shipsi::IoError(std::string("cannot open ") + path + " for writing");
    shipsi::emit_config(out, config->value);
    out.flush();
    if (!out) throw shipsi::IoError(std::string("failed writing ") + path);
  });
}

void shipsi_config_free(shipsi_config* config) { delete config; }

shipsi_status shipsi_generate(const shipsi_config* config, const char* out_dir, int force,
                              shipsi_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    shipsi::cmd_generate(config->value, out_dir, force != 0, logger(log, user));
  });
}

shipsi_status shipsi_train(const shipsi_config* config, const char* dataset_dir,
                           const char* out_dir, int force, shipsi_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(dataset_dir, "dataset_dir");
    require(out_dir, "out_dir");
    shipsi::cmd_train(config->value, dataset_dir, out_dir, force != 0, logger(log, user));
  });
}

shipsi_status shipsi_evaluate(const shipsi_config* config, const char* checkpoint,
                              const char* dataset_dir, const char* out_dir, int force,
                              shipsi_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(checkpoint, "checkpoint");
    require(dataset_dir, "dataset_dir");
    require(out_dir, "out_dir");
    shipsi::cmd_evaluate(config->value, checkpoint, dataset_dir, out_dir, force != 0,
                         logger(log, user));
  });
}

shipsi_status shipsi_study(const shipsi_config* config, const char* kind, const char* out_dir,
                           shipsi_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(kind, "kind");
    require(out_dir, "out_dir");
    const auto k = shipsi::parse_study_kind(kind);
    if (!k) {
      throw shipsi::InvalidArgument(std::string("unknown study '") + kind +
                                    "' (expected convergence or frame-ablation)");
    }
    shipsi::run_study(config->value, *k, out_dir, logger(log, user));
  });
}

void shipsi_predict_options_init(shipsi_predict_options* options) {
  if (!options) return;
  *options = shipsi_predict_options{};
  options->samples = 100;
}

shipsi_status shipsi_predict(const shipsi_predict_options* options) {
  return guarded([&] {
    require(options, "options");
    require(options->checkpoint, "checkpoint");
    require(options->run, "run");
    shipsi::PredictRequest req;
    req.checkpoint = options->checkpoint;
    req.run = options->run;
    if (options->waves) req.waves = options->waves;
    if (options->frame) req.frame = options->frame;
    req.actual_frame = options->actual_frame != 0;
    req.samples = options->samples;
    req.seed = options->seed;
    if (options->out) req.out = options->out;
    req.force = options->force != 0;
    shipsi::cmd_predict(req);
  });
}

shipsi_status shipsi_model_load(const char* path, shipsi_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new shipsi_model{shipsi::load_checkpoint(path)};
  });
}

shipsi_status shipsi_model_info_get(const shipsi_model* model, shipsi_model_info* info) {
  return guarded([&] {
    require(model, "model");
    require(info, "info");
    const auto& m = model->value;
    info->inputs = m.inputs();
    info->outputs = m.outputs();
    info->units = m.units();
    info->layers = m.layer_count();
    info->steps = m.steps;
    info->dropout = m.dropout_rate;
    info->mode = m.mode == shipsi::RunMode::kTurningCircle ? SHIPSI_TURNING_CIRCLE
                                                           : SHIPSI_COURSE_KEEPING;
  });
}

shipsi_status shipsi_model_predict(const shipsi_model* model, const double* elevations,
                                   size_t steps, size_t inputs, size_t samples, uint64_t seed,
                                   double* mean, double* std) {
  return guarded([&] {
    require(model, "model");
    require(elevations, "elevations");
    require(mean, "mean");
    require(std, "std");
    const auto& m = model->value;
    if (inputs != m.inputs()) {
      throw shipsi::InvalidArgument("model expects " + std::to_string(m.inputs()) +
                                    " probes, got " + std::to_string(inputs));
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto t = static_cast<Eigen::Index>(steps);
    Eigen::MatrixXd x = Eigen::Map<const RowMajor>(elevations, t, static_cast<Eigen::Index>(inputs));
    if (!m.input_scaler.empty()) x = m.input_scaler.apply(x);
    const auto ens = shipsi::mc_predict(m, x, samples, seed);
    const auto c = static_cast<Eigen::Index>(m.outputs());
    Eigen::Map<RowMajor>(mean, t, c) = ens.mean;
    Eigen::Map<RowMajor>(std, t, c) = ens.std;
  });
}

void shipsi_model_free(shipsi_model* model) { delete model; }

}  // extern "C"
