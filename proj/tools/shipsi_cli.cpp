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

// Command-line front end. Talks to the library through the C API only.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shipsi/shipsi.h"

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string mode;
  bool quiet = false;
};

void print_log(const char* msg, void* user) {
  if (!*static_cast<bool*>(user)) std::fprintf(stderr, "%s\n", msg);
}

int report(shipsi_status st) {
  if (st != SHIPSI_OK) {
    std::fprintf(stderr, "error: %s\n", shipsi_last_error());
  }
  return static_cast<int>(st);
}

// Owns a config handle built from --config, --mode, --set and any
// command-specific overrides.
class Config {
 public:
  ~Config() { shipsi_config_free(handle_); }

  shipsi_status load(const Common& c) {
    shipsi_status st = c.config_path.empty() ? shipsi_config_default(&handle_)
                                             : shipsi_config_load(c.config_path.c_str(), &handle_);
    if (st != SHIPSI_OK) return st;
    if (!c.mode.empty() && (st = set("run.mode", c.mode)) != SHIPSI_OK) return st;
    for (const auto& kv : c.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
        return SHIPSI_CONFIG_ERROR;
      }
      if ((st = set(kv.substr(0, eq), kv.substr(eq + 1))) != SHIPSI_OK) return st;
    }
    return SHIPSI_OK;
  }

  shipsi_status set(const std::string& key, const std::string& value) {
    return shipsi_config_set(handle_, key.c_str(), value.c_str());
  }

  shipsi_status finish() { return shipsi_config_validate(handle_); }

  const shipsi_config* get() const { return handle_; }

 private:
  shipsi_config* handle_ = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave-to-motion surrogate: simulate, train, predict, evaluate, study"};
  app.require_subcommand(1);
  app.set_version_flag("--version", shipsi_version());

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_mode) {
    sub->add_option("--config", common.config_path, "Experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--set", common.sets, "Override a config key (key=value), repeatable");
    if (with_mode) {
      sub->add_option("--mode", common.mode, "Run mode")
          ->check(CLI::IsMember({"course-keeping", "turning-circle"}));
    }
    sub->add_flag("-q,--quiet", common.quiet, "Suppress progress messages");
  };

  std::string out, data, checkpoint, run, waves, frame, kind;
  std::string seed;
  std::size_t samples = 0;
  bool force = false, actual_frame = false;

  auto* gen = app.add_subcommand("generate", "Simulate runs and assemble the dataset");
  add_common(gen, true);
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--seed", seed, "First training-run seed");
  gen->add_flag("--force", force, "Overwrite an existing output directory");

  auto* tr = app.add_subcommand("train", "Train a network on a generated dataset");
  add_common(tr, true);
  tr->add_option("--data", data, "Dataset directory (generate's out/dataset)")->required();
  tr->add_option("--out", out, "Output directory for model.ckpt and loss.csv")->required();
  tr->add_option("--seed", seed, "Initialization and dropout seed");
  tr->add_flag("--force", force, "Overwrite an existing checkpoint");

  auto* pr = app.add_subcommand("predict", "MC-dropout prediction for one run");
  add_common(pr, false);
  pr->add_option("--checkpoint", checkpoint, "Trained model")->required()->check(CLI::ExistingFile);
  pr->add_option("--run", run, "Run trajectory file (.traj)")->required()->check(CLI::ExistingFile);
  pr->add_option("--waves", waves, "Wave components (default: beside the run)");
  pr->add_option("--frame", frame, "Encounter frame (default: frame.csv of the generate directory)");
  pr->add_flag("--actual-frame", actual_frame, "Follow the run's own track");
  pr->add_option("--samples", samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  pr->add_option("--seed", seed, "Dropout seed");
  pr->add_option("--out", out, "Prediction file")->required();
  pr->add_flag("--force", force, "Overwrite an existing prediction file");

  auto* ev = app.add_subcommand("evaluate", "Error metrics on the validation split");
  add_common(ev, false);
  ev->add_option("--checkpoint", checkpoint, "Trained model")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", data, "Dataset directory")->required();
  ev->add_option("--out", out, "Output directory")->required();
  ev->add_option("--samples", samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  ev->add_option("--seed", seed, "Dropout seed");
  ev->add_flag("--force", force, "Overwrite existing results");

  auto* st = app.add_subcommand("study", "Convergence study or frame ablation (resumable)");
  add_common(st, true);
  st->add_option("kind", kind, "Study kind")
      ->required()
      ->check(CLI::IsMember({"convergence", "frame-ablation"}));
  st->add_option("--out", out, "Study directory")->required();
  st->add_option("--seed", seed, "Network seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : SHIPSI_CONFIG_ERROR;
  }

  const bool* quiet = &common.quiet;
  void* user = const_cast<bool*>(quiet);

  if (pr->parsed()) {
    shipsi_predict_options o;
    shipsi_predict_options_init(&o);
    o.checkpoint = checkpoint.c_str();
    o.run = run.c_str();
    o.waves = waves.empty() ? nullptr : waves.c_str();
    o.frame = frame.empty() ? nullptr : frame.c_str();
    o.actual_frame = actual_frame ? 1 : 0;
    if (samples > 0) o.samples = samples;
    if (!seed.empty()) {
      try {
        o.seed = std::stoull(seed);
      } catch (const std::exception&) {
        std::fprintf(stderr, "error: --seed expects a non-negative integer\n");
        return SHIPSI_CONFIG_ERROR;
      }
    }
    o.out = out.c_str();
    o.force = force ? 1 : 0;
    return report(shipsi_predict(&o));
  }

  Config cfg;
  if (auto s = cfg.load(common); s != SHIPSI_OK) return report(s);
  auto override = [&](const char* key, const std::string& value) {
    return value.empty() ? SHIPSI_OK : cfg.set(key, value);
  };

  shipsi_status s = SHIPSI_OK;
  if (gen->parsed()) {
    if ((s = override("data.train_seed", seed)) == SHIPSI_OK && (s = cfg.finish()) == SHIPSI_OK) {
      s = shipsi_generate(cfg.get(), out.c_str(), force, print_log, user);
    }
  } else if (tr->parsed()) {
    if ((s = override("net.seed", seed)) == SHIPSI_OK && (s = cfg.finish()) == SHIPSI_OK) {
      s = shipsi_train(cfg.get(), data.c_str(), out.c_str(), force, print_log, user);
    }
  } else if (ev->parsed()) {
    if ((s = override("predict.seed", seed)) == SHIPSI_OK &&
        (s = override("predict.samples", samples ? std::to_string(samples) : "")) == SHIPSI_OK &&
        (s = cfg.finish()) == SHIPSI_OK) {
      s = shipsi_evaluate(cfg.get(), checkpoint.c_str(), data.c_str(), out.c_str(), force,
                          print_log, user);
    }
  } else if (st->parsed()) {
    if ((s = override("net.seed", seed)) == SHIPSI_OK && (s = cfg.finish()) == SHIPSI_OK) {
      s = shipsi_study(cfg.get(), kind.c_str(), out.c_str(), print_log, user);
    }
  }
  return report(s);
}
