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

#include "core/encounter.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace shipsi {

std::string to_string(FrameYaw yaw) {
  return yaw == FrameYaw::kCircularMean ? "circular" : "track";
}

std::optional<FrameYaw> parse_frame_yaw(std::string_view text) {
  if (text == "circular") return FrameYaw::kCircularMean;
  if (text == "track") return FrameYaw::kTrackTangent;
  return std::nullopt;
}

void EncounterFrame::validate() const {
  const std::size_t n = t.size();
  if (x.size() != n || y.size() != n || psi.size() != n) {
    throw InvalidArgument("encounter frame arrays differ in length");
  }
  if (n >= 2) {
    const double dt = t[1] - t[0];
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(t[i]))) {
        throw InvalidArgument("encounter frame times must be uniform");
      }
    }
  }
}

EncounterFrame estimate_frame(std::span<const Trajectory> runs, FrameYaw yaw) {
  if (runs.empty()) throw InvalidArgument("frame estimation needs at least one run");
  const Trajectory& ref = runs.front();
  for (const auto& r : runs) {
    if (r.t != ref.t) {
      throw InvalidArgument("frame estimation requires identical time grids across runs");
    }
  }

  const std::size_t n = ref.size();
  const double inv = 1.0 / static_cast<double>(runs.size());
  EncounterFrame f;
  f.t = ref.t;
  f.x.assign(n, 0.0);
  f.y.assign(n, 0.0);
  f.psi.assign(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    double sx = 0.0, sy = 0.0;
    for (const auto& r : runs) {
      sx += r.x[i];
      sy += r.y[i];
    }
    f.x[i] = sx * inv;
    f.y[i] = sy * inv;
  }

  if (yaw == FrameYaw::kCircularMean) {
    // Circular mean taken relative to the first run's continuous yaw, which
    // keeps the result continuous in time without a separate unwrap pass.
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0, c = 0.0;
      for (const auto& r : runs) {
        const double d = r.yaw[i] - ref.yaw[i];
        s += std::sin(d);
        c += std::cos(d);
      }
      f.psi[i] = ref.yaw[i] + std::atan2(s, c);
    }
  } else {
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 < n ? i + 1 : i;
      double heading = prev;
      if (hi > lo) heading = std::atan2(f.y[hi] - f.y[lo], f.x[hi] - f.x[lo]);
      f.psi[i] = i == 0 ? heading : prev + wrap_angle(heading - prev);
      prev = f.psi[i];
    }
  }
  return f;
}

EncounterFrame actual_frame(const Trajectory& run) {
  EncounterFrame f;
  f.t = run.t;
  f.x = run.x;
  f.y = run.y;
  f.psi = run.yaw;
  return f;
}

ProbeLayout probe_layout(std::size_t count, double span) {
  if (count == 0) throw InvalidArgument("probe layout needs at least one probe");
  if (!(span > 0.0)) throw InvalidArgument("probe span must be positive");
  ProbeLayout layout;
  if (count == 1) {
    layout.offsets.emplace_back(0.0, 0.0);
    return layout;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(count - 1);
    layout.offsets.emplace_back(span * (frac - 0.5), 0.0);
  }
  return layout;
}

Eigen::Matrix2d rotation(double psi) {
  if (!std::isfinite(psi)) throw InvalidArgument("rotation angle must be finite");
  const double c = std::cos(psi), s = std::sin(psi);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::MatrixXd probe_elevations(const WaveComponents& components,
                                 const EncounterFrame& frame,
                                 const ProbeLayout& layout) {
  frame.validate();
  if (layout.size() == 0) throw InvalidArgument("probe layout is empty");
  Eigen::MatrixXd out(frame.size(), layout.size());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const Eigen::Matrix2d r = rotation(frame.psi[i]);
    const Vec2 origin(frame.x[i], frame.y[i]);
    for (std::size_t k = 0; k < layout.size(); ++k) {
      const Vec2 p = origin + r * layout.offsets[k];
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          elevation_at(components, p, frame.t[i]);
    }
  }
  return out;
}

void write_frame(std::ostream& out, const EncounterFrame& frame) {
  out << "t,x_E,y_E,psi_E\n";
  for (std::size_t i = 0; i < frame.size(); ++i) {
    out << text::fmt(frame.t[i]) << ',' << text::fmt(frame.x[i]) << ','
        << text::fmt(frame.y[i]) << ',' << text::fmt(frame.psi[i]) << '\n';
  }
}

EncounterFrame read_frame(std::istream& in) {
  std::string line;
  text::require_line(in, line, "frame header");
  EncounterFrame f;
  while (std::getline(in, line)) {
    const auto v = text::split_ws(line);
    if (v.empty()) continue;
    if (v.size() != 4) throw IoError("frame rows must have 4 columns");
    f.t.push_back(text::parse_double(v[0], "t"));
    f.x.push_back(text::parse_double(v[1], "x_E"));
    f.y.push_back(text::parse_double(v[2], "y_E"));
    f.psi.push_back(text::parse_double(v[3], "psi_E"));
  }
  f.validate();
  return f;
}

}  // namespace shipsi
