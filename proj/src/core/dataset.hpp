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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "core/encounter.hpp"
#include "core/vessel.hpp"
#include "core/wavefield.hpp"

namespace shipsi {

inline constexpr std::size_t kDofCount = 6;

// Output column labels: surge velocity, sway velocity, heave, roll, pitch and
// either yaw (course keeping) or yaw rate (turning circle).
std::array<std::string, kDofCount> dof_names(RunMode mode);

// T x 6 output matrix for one run, physical units.
Eigen::MatrixXd build_outputs(const Trajectory& run, RunMode mode);

// Per-channel zero-mean, unit-variance scaling (population moments).
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> stddev);

  // Fits over every row of every matrix; all matrices share a column count.
  // `names`, when given, labels channels in error messages.
  static Standardizer fit(std::span<const Eigen::MatrixXd> samples,
                          std::span<const std::string> names = {});

  Eigen::MatrixXd apply(const Eigen::MatrixXd& data) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& data) const;

  std::size_t channels() const { return mean_.size(); }
  bool empty() const { return mean_.empty(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }
  bool operator==(const Standardizer&) const = default;

 private:
  void check_width(const Eigen::MatrixXd& data) const;

  std::vector<double> mean_;
  std::vector<double> stddev_;
};

// Standardized input (T x K) and output (T x 6) matrices, one per run.
struct DatasetTensors {
  RunMode mode = RunMode::kCourseKeeping;
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> outputs;
  std::vector<std::uint64_t> run_seeds;
  Standardizer input_scaler;
  Standardizer output_scaler;

  std::size_t runs() const { return inputs.size(); }
  std::size_t steps() const;
  std::size_t probes() const;
  void validate() const;
};

// Everything needed to build the features of one run.
struct RunSource {
  const Trajectory* run = nullptr;
  const WaveComponents* waves = nullptr;
  const EncounterFrame* frame = nullptr;
};

// Unstandardized probe-elevation and output matrices for one run.
struct RawRun {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd outputs;
};

RawRun build_raw_run(const RunSource& source, const ProbeLayout& layout, RunMode mode);

// Fits both standardizers on these runs and applies them.
DatasetTensors assemble_training(std::span<const RunSource> runs,
                                 const ProbeLayout& layout, RunMode mode);

// Reuses standardizers fitted on a training split. Throws if `training` has
// no fitted standardizers yet.
DatasetTensors assemble_validation(std::span<const RunSource> runs,
                                   const ProbeLayout& layout, RunMode mode,
                                   const DatasetTensors& training);

enum class DataFormat { kText, kBinary };

std::optional<DataFormat> parse_data_format(std::string_view text);
std::string to_string(DataFormat format);

// A training split plus an optional validation split sharing standardizers.
struct Dataset {
  DatasetTensors train;
  DatasetTensors validation;
};

// Directory layout:
//   meta                       shapes, seeds, standardizers (17 digits)
//   train_NNNN.inputs.{txt,bin}   T rows x K probe columns, layout order
//   train_NNNN.outputs.{txt,bin}  T rows x 6 DoF columns, dof_names() order
//   val_NNNN.*                 same for the validation split
// Binary files are raw little-endian IEEE-754 doubles in row-major order.
// One matrix file: text rows of 17-digit values, or raw little-endian
// doubles in row-major order.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  DataFormat format);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path, Eigen::Index rows,
                            Eigen::Index cols, DataFormat format);

void save_dataset(const std::filesystem::path& dir, const Dataset& data,
                  DataFormat format);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace shipsi
