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

#include "core/wavefield.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/textio.hpp"

namespace shipsi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be finite");
  }
}

}  // namespace

double SpectrumParams::peak_frequency() const { return kTwoPi / peak_period; }

void SpectrumParams::validate() const {
  if (!(significant_wave_height > 0.0)) {
    throw InvalidArgument("significant wave height must be positive");
  }
  if (!(peak_period > 0.0)) {
    throw InvalidArgument("peak modal period must be positive");
  }
  if (!(gravity > 0.0)) throw InvalidArgument("gravity must be positive");
  if (!(wave_heading >= 0.0 && wave_heading < kTwoPi)) {
    throw InvalidArgument("wave heading must lie in [0, 2pi)");
  }
}

double WaveComponents::amplitude_sum() const {
  double s = 0.0;
  for (double a : amplitude) s += a;
  return s;
}

double WaveComponents::variance() const {
  double s = 0.0;
  for (double a : amplitude) s += 0.5 * a * a;
  return s;
}

double spectral_density(double omega, const SpectrumParams& params) {
  if (!(omega > 0.0)) {
    throw InvalidArgument("spectral density requires omega > 0");
  }
  const double wp = params.peak_frequency();
  const double hs = params.significant_wave_height;
  const double ratio4 = std::pow(wp / omega, 4);
  return (1.25 / 4.0) * (std::pow(wp, 4) / std::pow(omega, 5)) * hs * hs *
         std::exp(-1.25 * ratio4);
}

double wavenumber(double omega, double gravity) {
  if (!(omega > 0.0)) throw InvalidArgument("wavenumber requires omega > 0");
  if (!(gravity > 0.0)) throw InvalidArgument("gravity must be positive");
  return omega * omega / gravity;
}

double peak_wavelength(const SpectrumParams& params) {
  return kTwoPi / wavenumber(params.peak_frequency(), params.gravity);
}

WaveComponents discretize_spectrum(const SpectrumParams& params,
                                   std::size_t n_components, double omega_min,
                                   double omega_max, std::uint64_t seed) {
  params.validate();
  if (n_components == 0) {
    throw InvalidArgument("spectrum discretization needs at least 1 component");
  }
  if (!(omega_min > 0.0) || !(omega_max > omega_min)) {
    throw InvalidArgument("frequency range must satisfy 0 < omega_min < omega_max");
  }

  const double d_omega = (omega_max - omega_min) / static_cast<double>(n_components);
  // Propagation direction is opposite to the direction the waves come from.
  const double dir_x = -std::cos(params.wave_heading);
  const double dir_y = -std::sin(params.wave_heading);

  WaveComponents c;
  c.amplitude.reserve(n_components);
  c.omega.reserve(n_components);
  c.kx.reserve(n_components);
  c.ky.reserve(n_components);
  c.phase.reserve(n_components);

  Rng rng(seed);
  for (std::size_t n = 0; n < n_components; ++n) {
    const double w = omega_min + (static_cast<double>(n) + 0.5) * d_omega;
    const double k = wavenumber(w, params.gravity);
    c.amplitude.push_back(std::sqrt(2.0 * spectral_density(w, params) * d_omega));
    c.omega.push_back(w);
    c.kx.push_back(k * dir_x);
    c.ky.push_back(k * dir_y);
    c.phase.push_back(kTwoPi * rng.uniform());
  }
  return c;
}

double elevation_at(const WaveComponents& components, const Vec2& position,
                    double t) {
  require_finite(position.x(), "position");
  require_finite(position.y(), "position");
  require_finite(t, "time");
  double eta = 0.0;
  for (std::size_t n = 0; n < components.size(); ++n) {
    const double arg = components.omega[n] * t -
                       (components.kx[n] * position.x() +
                        components.ky[n] * position.y()) +
                       components.phase[n];
    eta += components.amplitude[n] * std::cos(arg);
  }
  return eta;
}

SurfaceSample surface_at(const WaveComponents& components,
                         const Vec2& position, double t) {
  require_finite(position.x(), "position");
  require_finite(position.y(), "position");
  require_finite(t, "time");
  SurfaceSample s;
  for (std::size_t n = 0; n < components.size(); ++n) {
    const double arg = components.omega[n] * t -
                       (components.kx[n] * position.x() +
                        components.ky[n] * position.y()) +
                       components.phase[n];
    const double a = components.amplitude[n];
    s.eta += a * std::cos(arg);
    // d/dx cos(wt - kx x - ky y + phi) = kx sin(...)
    const double sn = a * std::sin(arg);
    s.d_dx += components.kx[n] * sn;
    s.d_dy += components.ky[n] * sn;
  }
  return s;
}

void write_components(std::ostream& out, const WaveComponents& c) {
  out << c.size() << '\n';
  for (std::size_t n = 0; n < c.size(); ++n) {
    out << text::fmt(c.amplitude[n]) << ' ' << text::fmt(c.omega[n]) << ' '
        << text::fmt(c.kx[n]) << ' ' << text::fmt(c.ky[n]) << ' '
        << text::fmt(c.phase[n]) << '\n';
  }
}

WaveComponents read_components(std::istream& in) {
  std::string line;
  text::require_line(in, line, "wave component count");
  const auto head = text::split_ws(line);
  if (head.size() != 1) throw IoError("wave component header must hold one count");
  const double count = text::parse_double(head[0], "component count");
  if (!(count >= 1.0) || count != std::floor(count)) {
    throw IoError("wave component count must be a positive integer");
  }
  const auto n = static_cast<std::size_t>(count);

  WaveComponents c;
  for (std::size_t i = 0; i < n; ++i) {
    text::require_line(in, line, "wave component row");
    const auto f = text::split_ws(line);
    if (f.size() != 5) throw IoError("wave component row must have 5 columns");
    c.amplitude.push_back(text::parse_double(f[0], "amplitude"));
    c.omega.push_back(text::parse_double(f[1], "omega"));
    c.kx.push_back(text::parse_double(f[2], "kx"));
    c.ky.push_back(text::parse_double(f[3], "ky"));
    c.phase.push_back(text::parse_double(f[4], "phase"));
  }
  return c;
}

}  // namespace shipsi
