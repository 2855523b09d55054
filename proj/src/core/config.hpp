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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/dataset.hpp"
#include "core/encounter.hpp"
#include "core/trainer.hpp"
#include "core/vessel.hpp"
#include "core/wavefield.hpp"

namespace shipsi {

enum class FrameSource {
  kEstimated,  // mean of the training runs, frozen for validation
  kActual,     // each run's own track
};

std::string to_string(FrameSource source);
std::optional<FrameSource> parse_frame_source(std::string_view text);

// Everything a pipeline command needs. Read from a flat `key = value` file
// with dotted keys; unspecified keys keep the defaults below. Angles are in
// radians, lengths in metres, times in seconds.
struct ExperimentConfig {
  SpectrumParams spectrum;
  std::size_t components = 400;
  double omega_min_factor = 0.25;  // x peak frequency
  double omega_max_factor = 4.0;   // x peak frequency

  VesselParams vessel;
  PidGains pid = [] {
    PidGains g;
    g.derivative_sign = DerivativeSign::kStabilizing;
    return g;
  }();

  RunMode mode = RunMode::kCourseKeeping;
  double duration = 120.0;
  double dt = 0.5;
  int substeps = 4;
  double turn_rudder = deg2rad(35.0);

  std::size_t train_runs = 10;
  std::size_t validation_runs = 100;
  std::uint64_t train_seed = 1000;          // run i uses train_seed + i
  std::uint64_t validation_seed = 1000000;  // run j uses validation_seed + j
  DataFormat format = DataFormat::kText;

  std::size_t probes = 9;
  double probe_span = 0.0;  // 0 selects the peak wavelength
  FrameSource frame_source = FrameSource::kEstimated;
  FrameYaw frame_yaw = FrameYaw::kCircularMean;

  TrainOptions net = [] {
    TrainOptions o;
    o.units = 32;
    o.layers = 3;
    o.dropout = 0.1;
    o.adam.learning_rate = 1e-3;
    o.epochs = 300;
    o.batch_runs = 2;
    o.seed = 7;
    return o;
  }();

  std::size_t predict_samples = 100;
  std::uint64_t predict_seed = 99;

  std::vector<std::size_t> study_probes{1, 9, 27};
  std::vector<std::size_t> study_runs{10, 40, 160};

  double omega_min() const { return omega_min_factor * spectrum.peak_frequency(); }
  double omega_max() const { return omega_max_factor * spectrum.peak_frequency(); }
  double span() const;
  std::size_t steps() const;
  SimulationOptions simulation() const;

  // Throws ConfigError naming the offending key.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Parses `key = value` lines; `#` starts a comment. Unknown keys and
// malformed values raise ConfigError naming the key. The result is validated.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

// Writes every key, with its unit as a trailing comment.
void emit_config(std::ostream& out, const ExperimentConfig& config);

// Single-key access used by the C API and CLI overrides. set does not
// validate the whole config.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const ExperimentConfig& config, std::string_view key);
std::vector<std::string> config_keys();

}  // namespace shipsi
