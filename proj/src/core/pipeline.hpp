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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/eval.hpp"
#include "core/lstm.hpp"
#include "core/predict.hpp"
#include "core/trainer.hpp"

namespace shipsi {

// Progress messages from long-running commands; may be empty.
using Logger = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Simulation

// Waves of the run with this seed. Each run has its own phase realization.
WaveComponents run_waves(const ExperimentConfig& config, std::uint64_t run_seed);

struct RunSet {
  std::vector<std::uint64_t> seeds;
  std::vector<Trajectory> runs;
  std::vector<WaveComponents> waves;
  std::size_t size() const { return runs.size(); }
};

// Simulates runs first_seed, first_seed + 1, ... in parallel.
RunSet simulate_runs(const ExperimentConfig& config, std::uint64_t first_seed, std::size_t count);

// Frame used for every run of a dataset built from `train[0, m)`.
EncounterFrame training_frame(const ExperimentConfig& config, const RunSet& train, std::size_t m);

// Standardized training split from train[0, m) and validation split from
// `validation`, with `probes` probes and the configured frame source.
Dataset build_dataset(const ExperimentConfig& config, const RunSet& train, std::size_t m,
                      const RunSet& validation, std::size_t probes);

// ---------------------------------------------------------------------------
// Commands

// Writes runs/run_NNNN.{traj,waves} (training runs first), frame.csv,
// dataset/ and config.txt under `out`. Refuses a non-empty `out` unless
// `force`.
void cmd_generate(const ExperimentConfig& config, const std::filesystem::path& out, bool force,
                  const Logger& log = {});

// Trains on dataset/ and writes model.ckpt and loss.csv under `out`.
TrainResult cmd_train(const ExperimentConfig& config, const std::filesystem::path& dataset_dir,
                      const std::filesystem::path& out, bool force, const Logger& log = {});

struct PredictRequest {
  std::filesystem::path checkpoint;
  std::filesystem::path run;     // run_NNNN.traj
  std::filesystem::path waves;   // empty: the run path with a .waves extension
  std::filesystem::path frame;   // empty: frame.csv beside the runs directory
  bool actual_frame = false;     // follow the run's own track instead
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  bool force = false;
};

struct PredictResult {
  PredictionEnsemble ensemble;
  PlanarTrack track;
  std::vector<double> t;
};

// MC-dropout prediction for one run. Writes `t`, then `mean std lo hi` for
// every DoF, then the integrated `x y yaw` track.
PredictResult cmd_predict(const PredictRequest& request);

// Per-run errors and quantiles of a checkpoint on the dataset's validation
// split. Writes errors.csv and summary.csv under `out`.
std::vector<RunError> cmd_evaluate(const ExperimentConfig& config,
                                   const std::filesystem::path& checkpoint,
                                   const std::filesystem::path& dataset_dir,
                                   const std::filesystem::path& out, bool force,
                                   const Logger& log = {});

// ---------------------------------------------------------------------------
// Studies

enum class StudyKind { kConvergence, kFrameAblation };
std::string to_string(StudyKind kind);
std::optional<StudyKind> parse_study_kind(std::string_view text);

// One trained grid cell evaluated on the shared validation set.
struct CellResult {
  std::size_t probes = 0;
  std::size_t runs = 0;
  FrameSource source = FrameSource::kEstimated;
  bool valid = false;
  std::string failure;
  std::vector<RunError> errors;
  // Validation MC mean and std, physical units, one T x 6 matrix per run.
  std::vector<Eigen::MatrixXd> mean, std;
  std::vector<double> loss_history;
};

struct StudyResult {
  RunMode mode = RunMode::kCourseKeeping;
  std::vector<std::uint64_t> validation_seeds;
  // One table per frame source that was run (ablation: estimated, actual).
  std::vector<std::pair<FrameSource, ConvergenceTable>> tables;
  std::vector<CellResult> cells;
  // Validation truth, physical units.
  std::vector<Eigen::MatrixXd> truth;
  std::vector<double> t;

  const CellResult* cell(std::size_t probes, std::size_t runs, FrameSource source) const;
};

// Trains one model per (probes, runs) cell of the configured grid and scores
// each on the same validation runs. Cells are cached under out/cells/ and
// skipped when already complete, so an interrupted study resumes. Writes the
// table(s), PDF comparisons and best/worst run histories of the largest cell.
StudyResult run_study(const ExperimentConfig& config, StudyKind kind,
                      const std::filesystem::path& out, const Logger& log = {});

// Convenience wrappers returning the table(s).
ConvergenceTable convergence_study(const ExperimentConfig& config,
                                   const std::filesystem::path& out, const Logger& log = {});
std::pair<ConvergenceTable, ConvergenceTable> frame_ablation(const ExperimentConfig& config,
                                                             const std::filesystem::path& out,
                                                             const Logger& log = {});

// Oracle-vs-model density comparison for one DoF.
struct PdfComparison {
  Pdf oracle;
  Pdf model;
  double l1 = 0.0;
  double tail_l1 = 0.0;
};

PdfComparison compare_pdfs(std::span<const double> oracle, std::span<const double> model);

}  // namespace shipsi
