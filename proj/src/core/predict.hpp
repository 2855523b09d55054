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
#include <vector>

#include <Eigen/Core>

#include "core/lstm.hpp"
#include "core/vessel.hpp"

namespace shipsi {

// Width of the reported uncertainty band in ensemble standard deviations.
inline constexpr double kBandSigmas = 5.0;

// Monte Carlo dropout ensemble in physical units.
struct PredictionEnsemble {
  std::vector<Eigen::MatrixXd> samples;  // S matrices, T x outputs
  Eigen::MatrixXd mean;                  // T x outputs
  Eigen::MatrixXd std;                   // population std across samples

  Eigen::MatrixXd band_halfwidth() const { return kBandSigmas * std; }
  Eigen::MatrixXd lower() const { return mean - band_halfwidth(); }
  Eigen::MatrixXd upper() const { return mean + band_halfwidth(); }
};

// Per-step mean and population std of a sample set.
void ensemble_moments(const std::vector<Eigen::MatrixXd>& samples, Eigen::MatrixXd& mean,
                      Eigen::MatrixXd& std);

// Seed of the dropout masks used by sample `index` of an ensemble.
std::uint64_t mc_sample_seed(std::uint64_t seed, std::size_t index);

// S stochastic forward passes over a standardized T x K sequence, each with
// its own dropout masks, de-standardized with the model's output scaler.
PredictionEnsemble mc_predict(const LstmModel& model, const Eigen::MatrixXd& sequence,
                              std::size_t n_samples, std::uint64_t seed);

// Deterministic (dropout off) prediction in physical units.
Eigen::MatrixXd predict_deterministic(const LstmModel& model, const Eigen::MatrixXd& sequence);

struct PlanarTrack {
  std::vector<double> x, y, yaw;
};

// Dead-reckons a planar track from predicted body velocities. Column 5 is yaw
// for course keeping and yaw rate for turning circles. Trapezoidal rule.
PlanarTrack integrate_velocities(const Eigen::MatrixXd& prediction, RunMode mode,
                                 const InitialPose& start, double dt);

}  // namespace shipsi
