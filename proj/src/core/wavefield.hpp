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
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace shipsi {

using Vec2 = Eigen::Vector2d;

inline constexpr double kStandardGravity = 9.80665;

// Two-parameter sea description.
//
// `wave_heading` is the direction the waves come from, measured in the global
// frame from +x toward +y. A vessel on heading 0 therefore meets head seas at
// 0 and following seas at pi; pi*3/4 puts the waves on the quarter.
struct SpectrumParams {
  double significant_wave_height = 7.5;  // m
  double peak_period = 15.0;             // s
  double wave_heading = 0.75 * 3.14159265358979323846;
  double gravity = kStandardGravity;

  double peak_frequency() const;  // rad/s
  void validate() const;
  bool operator==(const SpectrumParams&) const = default;
};

// Discretized long-crested sea. Parallel arrays, one entry per component.
struct WaveComponents {
  std::vector<double> amplitude;  // m
  std::vector<double> omega;      // rad/s, strictly increasing
  std::vector<double> kx, ky;     // rad/m
  std::vector<double> phase;      // rad, [0, 2pi)

  std::size_t size() const { return amplitude.size(); }
  // Sum of amplitudes, an upper bound on |elevation|.
  double amplitude_sum() const;
  // Sum of a^2/2, the discrete variance of the surface.
  double variance() const;
  bool operator==(const WaveComponents&) const = default;
};

// Elevation and its horizontal gradient at one point.
struct SurfaceSample {
  double eta = 0.0;
  double d_dx = 0.0;
  double d_dy = 0.0;
};

// Bretschneider spectral density S(omega) in m^2 s.
double spectral_density(double omega, const SpectrumParams& params);

// Deep-water dispersion, k = omega^2 / g.
double wavenumber(double omega, double gravity);

// Nominal wavelength at the spectral peak.
double peak_wavelength(const SpectrumParams& params);

// Equal-width frequency bins on [omega_min, omega_max]; amplitudes from the
// bin-centre density, phases uniform on [0, 2pi) from `seed`.
WaveComponents discretize_spectrum(const SpectrumParams& params,
                                   std::size_t n_components, double omega_min,
                                   double omega_max, std::uint64_t seed);

double elevation_at(const WaveComponents& components, const Vec2& position,
                    double t);

// Elevation plus the analytic horizontal gradient of the linear surface.
SurfaceSample surface_at(const WaveComponents& components,
                         const Vec2& position, double t);

// Columnar text: a line holding the component count, then one row
// `a omega kx ky phi` per component.
void write_components(std::ostream& out, const WaveComponents& components);
WaveComponents read_components(std::istream& in);

}  // namespace shipsi
