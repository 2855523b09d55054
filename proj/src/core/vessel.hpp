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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/wavefield.hpp"

namespace shipsi {

enum class RunMode { kCourseKeeping, kTurningCircle };

std::string to_string(RunMode mode);
std::optional<RunMode> parse_run_mode(std::string_view text);

inline constexpr double kKnot = 1852.0 / 3600.0;

inline constexpr double deg2rad(double deg) {
  return deg * 3.14159265358979323846 / 180.0;
}

// Reduced-order vessel description. Hull particulars are metadata only; the
// dynamics are governed by the time constants and gains below.
//
// Surge relaxes to the nominal speed and loses speed in a turn. Sway and yaw
// are first-order maneuvering responses to the rudder. Heave, roll and pitch
// are linear second-order oscillators driven by the elevation, lateral slope
// and longitudinal slope of the surface at the CG.
struct VesselParams {
  double length_bp = 142.0;           // m
  double beam = 19.06;                // m
  double draft = 6.15;                // m
  double displacement = 8431.8;       // tonnes
  double gm_transverse = 1.95;        // m
  double roll_gyradius = 7.62;        // m
  double pitch_gyradius = 35.50;      // m
  double yaw_gyradius = 35.50;        // m

  double nominal_speed = 20.0 * kKnot;  // m/s

  double surge_time_constant = 20.0;  // s
  double turn_speed_loss = 30.0;      // s^2/rad^2 per s: du/dt -= c u r^2
  double surge_slope_gain = 0.02;     // surge accel per g of longitudinal slope
  double added_resistance = 0.001;    // m/s^2 per m^2 of elevation

  double sway_time_constant = 8.0;    // s
  double sway_rudder_gain = -1.2;     // steady sway (m/s) per rad of rudder
  double sway_slope_gain = 0.05;      // sway accel per g of lateral slope
  double sway_drift = 0.0005;        // m/s^2 per m^2 of elevation

  double yaw_time_constant = 10.0;    // s
  double yaw_rudder_gain = 0.044;     // steady yaw rate (rad/s) per rad of rudder
  double yaw_slope_gain = 0.01;       // yaw accel (rad/s^2) per rad of lateral slope
  // Mean wave yaw moment, scaled by sin(2 x relative wave direction).
  double yaw_drift = 0.0;             // rad/s^2 per m^2 of elevation

  // Heave, roll, pitch.
  std::array<double, 3> natural_periods{8.0, 10.9, 7.0};   // s
  std::array<double, 3> damping_ratios{0.30, 0.08, 0.30};
  // Heave per m of elevation, roll per rad of lateral slope, pitch per rad of
  // longitudinal slope.
  std::array<double, 3> excitation_gains{1.0, 2.0, -1.0};
  double turn_heel_gain = 0.4;        // rad of heel per (m/s * rad/s)

  void validate() const;
  bool operator==(const VesselParams&) const = default;
};

enum class DerivativeSign {
  kAsPrinted,    // delta = Gp e + Gi int(e) + Gd psi_dot
  kStabilizing,  // delta = Gp e + Gi int(e) - Gd psi_dot
};

struct PidGains {
  double proportional = 4.0;
  double integral = 0.0;             // 1/s
  double derivative = 1.0;           // s
  double max_rudder_rate = deg2rad(35.0);  // rad/s
  double max_deflection = deg2rad(35.0);   // rad
  double desired_heading = 0.0;            // rad
  DerivativeSign derivative_sign = DerivativeSign::kAsPrinted;

  void validate() const;
  bool operator==(const PidGains&) const = default;
};

struct RudderCommand {
  double deflection = 0.0;  // rad
  bool saturated = false;
};

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

// Commanded rudder angle, clamped to +-max_deflection.
RudderCommand pid_rudder(double psi_desired, double psi, double error_integral,
                         double psi_dot, const PidGains& gains);

// Moves `current` toward `commanded` by at most max_rate * dt.
double rudder_rate_limit(double current, double commanded, double dt,
                         double max_rate);

struct InitialPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  // Initial oscillator displacements (m, rad, rad); velocities start at zero.
  double heave = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
};

struct SimulationOptions {
  RunMode mode = RunMode::kCourseKeeping;
  double duration = 360.0;   // s
  double dt = 0.5;           // output sample interval, s
  int substeps = 4;          // RK4 steps per output sample
  double turn_rudder = deg2rad(35.0);
  InitialPose initial;
};

// One simulated run sampled on a uniform grid. Yaw is continuous (unwrapped);
// surge/sway velocities are in the body frame.
struct Trajectory {
  std::uint64_t seed = 0;
  RunMode mode = RunMode::kCourseKeeping;
  double dt = 0.5;
  std::vector<double> t, x, y, heave, roll, pitch, yaw, surge_vel, sway_vel,
      yaw_rate, rudder;

  std::size_t size() const { return t.size(); }
  void validate() const;
  bool operator==(const Trajectory&) const = default;
};

// Integrates the reduced-order dynamics with fixed-step RK4. The rudder and
// the heading-error integral are updated once per internal step and held
// constant across its stages.
Trajectory simulate(const VesselParams& params, const PidGains& gains,
                    const WaveComponents& waves, const SimulationOptions& opts);

// Text file: `seed`, `mode` and `dt` header lines, a column-name line, then
// rows `t x y heave roll pitch yaw u v r rudder`.
void write_trajectory(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory(std::istream& in);

}  // namespace shipsi
