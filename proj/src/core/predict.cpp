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

#include "core/predict.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace shipsi {

namespace {

// Samples evaluated together in one batched forward pass.
constexpr std::size_t kSampleChunk = 25;

Eigen::MatrixXd to_physical(const LstmModel& model, const Eigen::MatrixXd& standardized) {
  return model.output_scaler.empty() ? standardized : model.output_scaler.invert(standardized);
}

}  // namespace

void ensemble_moments(const std::vector<Eigen::MatrixXd>& samples, Eigen::MatrixXd& mean,
                      Eigen::MatrixXd& std) {
  if (samples.empty()) throw InvalidArgument("ensemble needs at least one sample");
  const double s = static_cast<double>(samples.size());
  // Shifted by the first sample, so identical samples give exactly zero spread.
  const Eigen::MatrixXd& ref = samples.front();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(ref.rows(), ref.cols());
  Eigen::MatrixXd sq = sum;
  for (const auto& x : samples) {
    const Eigen::MatrixXd d = x - ref;
    sum += d;
    sq.array() += d.array().square();
  }
  const Eigen::MatrixXd shift = sum / s;
  mean = ref + shift;
  std = (sq / s - shift.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
}

std::uint64_t mc_sample_seed(std::uint64_t seed, std::size_t index) {
  return derive_seed(seed, 0x3c, index);
}

PredictionEnsemble mc_predict(const LstmModel& model, const Eigen::MatrixXd& sequence,
                              std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw InvalidArgument("MC dropout needs at least one sample");
  if (static_cast<std::size_t>(sequence.cols()) != model.inputs()) {
    throw InvalidArgument("sequence has " + std::to_string(sequence.cols()) +
                          " probes, model expects " + std::to_string(model.inputs()));
  }

  PredictionEnsemble ens;
  ens.samples.resize(n_samples);
  const std::size_t chunks = (n_samples + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kSampleChunk;
    const std::size_t hi = std::min(n_samples, lo + kSampleChunk);
    std::vector<Eigen::MatrixXd> batch(hi - lo, sequence);
    std::vector<std::uint64_t> seeds;
    for (std::size_t s = lo; s < hi; ++s) seeds.push_back(mc_sample_seed(seed, s));
    auto out = forward_batch(model, batch, seeds);
    for (std::size_t s = lo; s < hi; ++s) ens.samples[s] = to_physical(model, out[s - lo]);
  });
  ensemble_moments(ens.samples, ens.mean, ens.std);
  return ens;
}

Eigen::MatrixXd predict_deterministic(const LstmModel& model, const Eigen::MatrixXd& sequence) {
  return to_physical(model, forward(model, sequence));
}

PlanarTrack integrate_velocities(const Eigen::MatrixXd& prediction, RunMode mode,
                                 const InitialPose& start, double dt) {
  if (prediction.cols() < 6) throw InvalidArgument("prediction must have 6 columns");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const auto n = static_cast<std::size_t>(prediction.rows());
  PlanarTrack track;
  if (n == 0) return track;
  track.x.resize(n);
  track.y.resize(n);
  track.yaw.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (mode == RunMode::kCourseKeeping) {
      track.yaw[i] = prediction(r, 5);
    } else if (i == 0) {
      track.yaw[i] = start.yaw;
    } else {
      track.yaw[i] = track.yaw[i - 1] + 0.5 * dt * (prediction(r - 1, 5) + prediction(r, 5));
    }
  }
  auto vel = [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double u = prediction(r, 0), v = prediction(r, 1);
    const double c = std::cos(track.yaw[i]), s = std::sin(track.yaw[i]);
    return std::pair{u * c - v * s, u * s + v * c};
  };
  track.x[0] = start.x;
  track.y[0] = start.y;
  auto prev = vel(0);
  for (std::size_t i = 1; i < n; ++i) {
    const auto cur = vel(i);
    track.x[i] = track.x[i - 1] + 0.5 * dt * (prev.first + cur.first);
    track.y[i] = track.y[i - 1] + 0.5 * dt * (prev.second + cur.second);
    prev = cur;
  }
  return track;
}

}  // namespace shipsi
