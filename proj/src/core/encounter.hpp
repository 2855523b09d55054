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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "core/vessel.hpp"
#include "core/wavefield.hpp"

namespace shipsi {

// Horizontal reference frame following a (mean) vessel track.
struct EncounterFrame {
  std::vector<double> t;
  std::vector<double> x, y;  // x_E(t), m
  std::vector<double> psi;   // psi_E(t), rad, continuous in time

  std::size_t size() const { return t.size(); }
  void validate() const;
  bool operator==(const EncounterFrame&) const = default;
};

enum class FrameYaw {
  kCircularMean,   // yaw averaged across runs on the circle
  kTrackTangent,   // yaw taken from the direction of the mean track
};

std::string to_string(FrameYaw yaw);
std::optional<FrameYaw> parse_frame_yaw(std::string_view text);

// Per-step mean of an ensemble of runs sharing one time grid.
EncounterFrame estimate_frame(std::span<const Trajectory> runs,
                              FrameYaw yaw = FrameYaw::kCircularMean);

// Frame that follows one run exactly.
EncounterFrame actual_frame(const Trajectory& run);

// Probe offsets relative to the CG, in body axes (x forward).
struct ProbeLayout {
  std::vector<Vec2> offsets;
  std::size_t size() const { return offsets.size(); }
};

// K = 1 puts a single probe at the CG; K > 1 spaces probes uniformly along
// the centerline over [-span/2, +span/2].
ProbeLayout probe_layout(std::size_t count, double span);

Eigen::Matrix2d rotation(double psi);

// T x K matrix of surface elevations at probes carried by the frame.
Eigen::MatrixXd probe_elevations(const WaveComponents& components,
                                 const EncounterFrame& frame,
                                 const ProbeLayout& layout);

// `t,x_E,y_E,psi_E` with a header row.
void write_frame(std::ostream& out, const EncounterFrame& frame);
EncounterFrame read_frame(std::istream& in);

}  // namespace shipsi
