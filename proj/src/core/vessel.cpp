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

#include "core/vessel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace shipsi {

std::string to_string(RunMode mode) {
  return mode == RunMode::kCourseKeeping ? "course-keeping" : "turning-circle";
}

std::optional<RunMode> parse_run_mode(std::string_view text) {
  if (text == "course-keeping") return RunMode::kCourseKeeping;
  if (text == "turning-circle") return RunMode::kTurningCircle;
  return std::nullopt;
}

void VesselParams::validate() const {
  if (!(length_bp > 0.0)) throw InvalidArgument("length_bp must be positive");
  if (!(nominal_speed > 0.0)) throw InvalidArgument("nominal speed must be positive");
  if (!(surge_time_constant > 0.0) || !(sway_time_constant > 0.0) ||
      !(yaw_time_constant > 0.0)) {
    throw InvalidArgument("maneuvering time constants must be positive");
  }
  for (double p : natural_periods) {
    if (!(p > 0.0)) throw InvalidArgument("natural periods must be positive");
  }
  for (double z : damping_ratios) {
    if (!(z > 0.0 && z < 2.0)) {
      throw InvalidArgument("damping ratios must lie in (0, 2)");
    }
  }
}

void PidGains::validate() const {
  if (!(max_rudder_rate > 0.0)) throw InvalidArgument("max rudder rate must be positive");
  if (!(max_deflection > 0.0)) throw InvalidArgument("max deflection must be positive");
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

RudderCommand pid_rudder(double psi_desired, double psi, double error_integral,
                         double psi_dot, const PidGains& gains) {
  const double error = wrap_angle(psi_desired - psi);
  const double d_sign = gains.derivative_sign == DerivativeSign::kAsPrinted ? 1.0 : -1.0;
  const double raw = gains.proportional * error + gains.integral * error_integral +
                     d_sign * gains.derivative * psi_dot;
  RudderCommand cmd;
  cmd.deflection = std::clamp(raw, -gains.max_deflection, gains.max_deflection);
  cmd.saturated = cmd.deflection != raw;
  return cmd;
}

double rudder_rate_limit(double current, double commanded, double dt,
                         double max_rate) {
  const double reach = max_rate * dt;
  return current + std::clamp(commanded - current, -reach, reach);
}

namespace {

// x, y, psi, u, v, r, heave, heave rate, roll, roll rate, pitch, pitch rate.
using State = std::array<double, 12>;

struct Dynamics {
  const VesselParams& p;
  const WaveComponents& waves;
  double gravity;
  double wave_direction;  // propagation direction, rad

  State derivative(double t, const State& s, double rudder) const {
    const double psi = s[2], u = s[3], v = s[4], r = s[5];
    const double c = std::cos(psi), sn = std::sin(psi);

    const SurfaceSample w = surface_at(waves, Vec2(s[0], s[1]), t);
    const double slope_long = c * w.d_dx + sn * w.d_dy;
    const double slope_lat = -sn * w.d_dx + c * w.d_dy;
    const double eta2 = w.eta * w.eta;
    const double speed_ratio = u / p.nominal_speed;

    State d{};
    d[0] = u * c - v * sn;
    d[1] = u * sn + v * c;
    d[2] = r;
    d[3] = (p.nominal_speed - u) / p.surge_time_constant -
           p.turn_speed_loss * u * r * r -
           p.surge_slope_gain * gravity * slope_long - p.added_resistance * eta2;
    d[4] = (p.sway_rudder_gain * rudder * speed_ratio - v) / p.sway_time_constant -
           p.sway_slope_gain * gravity * slope_lat + p.sway_drift * eta2;
    d[5] = (p.yaw_rudder_gain * rudder * speed_ratio - r) / p.yaw_time_constant +
           p.yaw_slope_gain * slope_lat +
           p.yaw_drift * eta2 * std::sin(2.0 * (wave_direction - psi));

    const std::array<double, 3> forcing{
        p.excitation_gains[0] * w.eta,
        p.excitation_gains[1] * slope_lat + p.turn_heel_gain * u * r,
        p.excitation_gains[2] * slope_long};
    for (int k = 0; k < 3; ++k) {
      const double wn = 2.0 * std::numbers::pi / p.natural_periods[k];
      const double pos = s[6 + 2 * k], vel = s[7 + 2 * k];
      d[6 + 2 * k] = vel;
      d[7 + 2 * k] = wn * wn * (forcing[k] - pos) - 2.0 * p.damping_ratios[k] * wn * vel;
    }
    return d;
  }
};

State axpy(const State& a, double h, const State& b) {
  State out;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + h * b[i];
  return out;
}

}  // namespace

Trajectory simulate(const VesselParams& params, const PidGains& gains,
                    const WaveComponents& waves, const SimulationOptions& opts) {
  params.validate();
  gains.validate();
  if (!(opts.dt > 0.0)) throw InvalidArgument("output time step must be positive");
  if (opts.substeps < 1) throw InvalidArgument("substeps must be at least 1");
  const double steps_real = opts.duration / opts.dt;
  const auto n_out = static_cast<std::size_t>(std::llround(steps_real));
  if (n_out == 0 || std::abs(steps_real - static_cast<double>(n_out)) > 1e-9) {
    throw InvalidArgument("duration must be a positive integer multiple of dt");
  }

  const double direction = waves.size() > 0 ? std::atan2(waves.ky[0], waves.kx[0]) : 0.0;
  const Dynamics dyn{params, waves, kStandardGravity, direction};
  const double h = opts.dt / opts.substeps;

  State s{};
  s[0] = opts.initial.x;
  s[1] = opts.initial.y;
  s[2] = opts.initial.yaw;
  s[3] = params.nominal_speed;
  s[6] = opts.initial.heave;
  s[8] = opts.initial.roll;
  s[10] = opts.initial.pitch;

  double rudder = 0.0;
  double error_integral = 0.0;

  Trajectory traj;
  traj.mode = opts.mode;
  traj.dt = opts.dt;
  auto record = [&](double t) {
    traj.t.push_back(t);
    traj.x.push_back(s[0]);
    traj.y.push_back(s[1]);
    traj.yaw.push_back(s[2]);
    traj.surge_vel.push_back(s[3]);
    traj.sway_vel.push_back(s[4]);
    traj.yaw_rate.push_back(s[5]);
    traj.heave.push_back(s[6]);
    traj.roll.push_back(s[8]);
    traj.pitch.push_back(s[10]);
    traj.rudder.push_back(rudder);
  };

  record(0.0);
  long step = 0;
  for (std::size_t i = 1; i < n_out; ++i) {
    for (int sub = 0; sub < opts.substeps; ++sub, ++step) {
      const double t = static_cast<double>(i - 1) * opts.dt + sub * h;

      double commanded;
      if (opts.mode == RunMode::kCourseKeeping) {
        commanded = pid_rudder(gains.desired_heading, s[2], error_integral, s[5], gains)
                        .deflection;
        error_integral += wrap_angle(gains.desired_heading - s[2]) * h;
      } else {
        commanded = std::clamp(opts.turn_rudder, -gains.max_deflection, gains.max_deflection);
      }
      rudder = rudder_rate_limit(rudder, commanded, h, gains.max_rudder_rate);

      const State k1 = dyn.derivative(t, s, rudder);
      const State k2 = dyn.derivative(t + 0.5 * h, axpy(s, 0.5 * h, k1), rudder);
      const State k3 = dyn.derivative(t + 0.5 * h, axpy(s, 0.5 * h, k2), rudder);
      const State k4 = dyn.derivative(t + h, axpy(s, h, k3), rudder);
      for (std::size_t j = 0; j < s.size(); ++j) {
        s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      }
      for (double v : s) {
        if (!std::isfinite(v)) {
          throw DivergenceError(
              "vessel simulation diverged at internal step " + std::to_string(step), step);
        }
      }
    }
    record(static_cast<double>(i) * opts.dt);
  }
  return traj;
}

void Trajectory::validate() const {
  const std::size_t n = t.size();
  for (const auto* v : {&x, &y, &heave, &roll, &pitch, &yaw, &surge_vel, &sway_vel,
                        &yaw_rate, &rudder}) {
    if (v->size() != n) throw InvalidArgument("trajectory arrays differ in length");
  }
  if (!(dt > 0.0)) throw InvalidArgument("trajectory dt must be positive");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(t[i] > t[i - 1]) || std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(1.0, t[i])) {
      throw InvalidArgument("trajectory times must be uniform with step dt");
    }
  }
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  out << "seed " << traj.seed << '\n'
      << "mode " << to_string(traj.mode) << '\n'
      << "dt " << text::fmt(traj.dt) << '\n'
      << "t x y heave roll pitch yaw u v r rudder\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << text::fmt(traj.t[i]) << ' ' << text::fmt(traj.x[i]) << ' '
        << text::fmt(traj.y[i]) << ' ' << text::fmt(traj.heave[i]) << ' '
        << text::fmt(traj.roll[i]) << ' ' << text::fmt(traj.pitch[i]) << ' '
        << text::fmt(traj.yaw[i]) << ' ' << text::fmt(traj.surge_vel[i]) << ' '
        << text::fmt(traj.sway_vel[i]) << ' ' << text::fmt(traj.yaw_rate[i]) << ' '
        << text::fmt(traj.rudder[i]) << '\n';
  }
}

Trajectory read_trajectory(std::istream& in) {
  Trajectory traj;
  std::string line;
  auto header = [&](std::string_view key) {
    text::require_line(in, line, "trajectory header");
    const auto f = text::split_ws(line);
    if (f.size() != 2 || f[0] != key) {
      throw IoError("trajectory header expected '" + std::string(key) + " <value>'");
    }
    return std::string(f[1]);
  };
  const std::string seed = header("seed");
  try {
    traj.seed = std::stoull(seed);
  } catch (const std::exception&) {
    throw IoError("trajectory seed is not an integer: " + seed);
  }
  const auto mode = parse_run_mode(header("mode"));
  if (!mode) throw IoError("trajectory mode must be course-keeping or turning-circle");
  traj.mode = *mode;
  traj.dt = text::parse_double(header("dt"), "dt");
  text::require_line(in, line, "trajectory column names");

  while (std::getline(in, line)) {
    const auto f = text::split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 11) throw IoError("trajectory rows must have 11 columns");
    std::vector<double>* cols[] = {&traj.t,       &traj.x,         &traj.y,
                                   &traj.heave,   &traj.roll,      &traj.pitch,
                                   &traj.yaw,     &traj.surge_vel, &traj.sway_vel,
                                   &traj.yaw_rate, &traj.rudder};
    for (std::size_t c = 0; c < 11; ++c) cols[c]->push_back(text::parse_double(f[c], "trajectory value"));
  }
  traj.validate();
  return traj;
}

}  // namespace shipsi
