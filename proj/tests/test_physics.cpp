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

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "doctest.h"
#include "oracles.hpp"

#include "core/encounter.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/vessel.hpp"
#include "core/wavefield.hpp"

using namespace shipsi;
using std::numbers::pi;

namespace {

// Closed-form two-parameter spectrum, written out independently.
double bretschneider(double w, double hs, double tp) {
  const double wp = 2 * pi / tp;
  return 5.0 / 16.0 * hs * hs * std::pow(wp, 4) / std::pow(w, 5) *
         std::exp(-1.25 * std::pow(wp / w, 4));
}

WaveComponents single_component(double a, double omega, double heading, double phase) {
  WaveComponents c;
  const double k = omega * omega / kStandardGravity;
  c.amplitude = {a};
  c.omega = {omega};
  c.kx = {-k * std::cos(heading)};
  c.ky = {-k * std::sin(heading)};
  c.phase = {phase};
  return c;
}

WaveComponents calm() {
  SpectrumParams p;
  auto c = discretize_spectrum(p, 10, 0.1, 1.0, 1);
  for (auto& a : c.amplitude) a = 0.0;
  return c;
}

WaveComponents default_sea(std::uint64_t seed) {
  SpectrumParams p;
  const double wp = p.peak_frequency();
  return discretize_spectrum(p, 400, 0.25 * wp, 4 * wp, seed);
}

PidGains stabilizing() {
  PidGains g;
  g.derivative_sign = DerivativeSign::kStabilizing;
  return g;
}

}  // namespace

TEST_SUITE("wavefield") {
  TEST_CASE("density at the peak") {
    SpectrumParams p;
    const double wp = 2 * pi / 15.0;
    const double expect = bretschneider(wp, 7.5, 15.0);
    CHECK(expect == doctest::Approx(12.02).epsilon(5e-4));
    CHECK(spectral_density(wp, p) == doctest::Approx(expect).epsilon(1e-13));
    // The omega^-5 tail: 5.4e-11 at 100 rad/s, below 1e-12 from about 220 rad/s.
    CHECK(spectral_density(100.0, p) == doctest::Approx(bretschneider(100.0, 7.5, 15.0)).epsilon(1e-13));
    CHECK(spectral_density(100.0, p) < 1e-10);
    CHECK(spectral_density(300.0, p) < 1e-12);
    CHECK_THROWS_AS(spectral_density(0.0, p), InvalidArgument);
  }

  TEST_CASE("density matches the closed form across frequencies") {
    SpectrumParams p;
    p.significant_wave_height = 3.0;
    p.peak_period = 9.0;
    for (double w = 0.2; w < 3.0; w += 0.137) {
      CHECK(spectral_density(w, p) == doctest::Approx(bretschneider(w, 3.0, 9.0)).epsilon(1e-13));
    }
  }

  TEST_CASE("spectral closure by quadrature") {
    for (auto [hs, tp] : {std::pair{7.5, 15.0}, {2.0, 6.0}, {12.0, 18.0}}) {
      SpectrumParams p;
      p.significant_wave_height = hs;
      p.peak_period = tp;
      const double wp = p.peak_frequency();
      const double total = oracle::spectrum_integral(p, 1e-3 * wp, 10 * wp);
      CHECK(total == doctest::Approx(hs * hs / 16).epsilon(5e-3));
    }
  }

  TEST_CASE("dispersion") {
    CHECK(wavenumber(0.41888, kStandardGravity) == doctest::Approx(0.017892).epsilon(5e-5));
    CHECK(wavenumber(std::sqrt(kStandardGravity), kStandardGravity) == doctest::Approx(1.0).epsilon(1e-15));
    SpectrumParams p;
    const double deep = kStandardGravity * 15.0 * 15.0 / (2 * pi);
    CHECK(deep == doctest::Approx(351.2).epsilon(2e-4));
    CHECK(peak_wavelength(p) == doctest::Approx(deep).epsilon(1e-13));
    CHECK(2 * pi / wavenumber(p.peak_frequency(), p.gravity) == doctest::Approx(deep).epsilon(1e-13));
  }

  TEST_CASE("discretized variance") {
    SpectrumParams p;
    const auto c = default_sea(5);
    CHECK(c.size() == 400);
    CHECK(c.variance() == doctest::Approx(7.5 * 7.5 / 16).epsilon(1e-2));
    const double wp = p.peak_frequency();
    CHECK(c.variance() ==
          doctest::Approx(oracle::spectrum_integral(p, 0.25 * wp, 4 * wp)).epsilon(2e-3));
  }

  TEST_CASE("component geometry") {
    SpectrumParams p;
    const auto c = default_sea(9);
    for (std::size_t n = 0; n < c.size(); ++n) {
      const double k = std::hypot(c.kx[n], c.ky[n]);
      const double period = 2 * pi / c.omega[n];
      CHECK(2 * pi / k == doctest::Approx(kStandardGravity * period * period / (2 * pi)).epsilon(1e-12));
      // Propagation is opposite to the direction the waves come from.
      CHECK(c.kx[n] == doctest::Approx(-k * std::cos(p.wave_heading)).epsilon(1e-12));
      CHECK(c.ky[n] == doctest::Approx(-k * std::sin(p.wave_heading)).epsilon(1e-12));
      CHECK(c.phase[n] >= 0.0);
      CHECK(c.phase[n] < 2 * pi);
      if (n > 0) CHECK(c.omega[n] > c.omega[n - 1]);
    }
  }

  TEST_CASE("single bin") {
    SpectrumParams p;
    const auto c = discretize_spectrum(p, 1, 0.3, 0.5, 1);
    REQUIRE(c.size() == 1);
    CHECK(c.omega[0] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(c.amplitude[0] == doctest::Approx(std::sqrt(2 * spectral_density(0.4, p) * 0.2)).epsilon(1e-14));
  }

  TEST_CASE("determinism") {
    CHECK(default_sea(3) == default_sea(3));
    CHECK(!(default_sea(3) == default_sea(4)));
  }

  TEST_CASE("elevation") {
    const auto one = single_component(2.0, 0.5, 0.0, 0.0);
    CHECK(elevation_at(one, Vec2(0, 0), 0.0) == 2.0);

    const auto c = default_sea(11);
    Rng rng(42);
    const double bound = c.amplitude_sum();
    bool ok = true;
    for (int i = 0; i < 10000; ++i) {
      const Vec2 pos(rng.uniform() * 4000 - 2000, rng.uniform() * 4000 - 2000);
      const double t = rng.uniform() * 3600;
      ok = ok && std::abs(elevation_at(c, pos, t)) <= bound;
    }
    CHECK(ok);
  }

  TEST_CASE("time-averaged variance") {
    const auto c = default_sea(17);
    double sum = 0.0;
    const int n = 200000;
    const double dt = 0.5;
    for (int i = 0; i < n; ++i) {
      const double e = elevation_at(c, Vec2(0, 0), i * dt);
      sum += e * e;
    }
    CHECK(sum / n == doctest::Approx(c.variance()).epsilon(2e-2));
  }

  TEST_CASE("analytic slope matches a central difference") {
    const auto c = default_sea(2);
    const Vec2 p(123.0, -45.0);
    const double h = 1e-4;
    const auto s = surface_at(c, p, 37.0);
    CHECK(s.eta == doctest::Approx(elevation_at(c, p, 37.0)).epsilon(1e-14));
    const double dx = (elevation_at(c, p + Vec2(h, 0), 37.0) - elevation_at(c, p - Vec2(h, 0), 37.0)) / (2 * h);
    const double dy = (elevation_at(c, p + Vec2(0, h), 37.0) - elevation_at(c, p - Vec2(0, h), 37.0)) / (2 * h);
    CHECK(s.d_dx == doctest::Approx(dx).epsilon(1e-6));
    CHECK(s.d_dy == doctest::Approx(dy).epsilon(1e-6));
  }

  TEST_CASE("component file round trip") {
    const auto c = default_sea(23);
    std::stringstream ss;
    write_components(ss, c);
    CHECK(read_components(ss) == c);
    std::stringstream bad("3\n1 2 3 4 5\n");
    CHECK_THROWS_AS(read_components(bad), IoError);
  }

  TEST_CASE("invalid parameters") {
    SpectrumParams p;
    p.significant_wave_height = -1;
    CHECK_THROWS_AS(discretize_spectrum(p, 10, 0.1, 1.0, 1), InvalidArgument);
    SpectrumParams q;
    CHECK_THROWS_AS(discretize_spectrum(q, 0, 0.1, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(discretize_spectrum(q, 10, 1.0, 0.1, 1), InvalidArgument);
  }
}

TEST_SUITE("vessel") {
  TEST_CASE("pid law") {
    PidGains g;
    CHECK(pid_rudder(0.3, 0.3, 0.0, 0.0, g).deflection == 0.0);
    // 4 * 0.1 + 1 * 0.02 as printed.
    const double expect = 4.0 * 0.1 + 1.0 * 0.02;
    CHECK(pid_rudder(0.1, 0.0, 0.0, 0.02, g).deflection == doctest::Approx(expect).epsilon(1e-15));
    CHECK(expect == doctest::Approx(0.42).epsilon(1e-15));
    g.derivative_sign = DerivativeSign::kStabilizing;
    CHECK(pid_rudder(0.1, 0.0, 0.0, 0.02, g).deflection == doctest::Approx(0.38).epsilon(1e-15));
    const auto sat = pid_rudder(1.0, 0.0, 0.0, 0.0, g);
    CHECK(sat.saturated);
    CHECK(sat.deflection == g.max_deflection);
    CHECK(pid_rudder(-1.0, 0.0, 0.0, 0.0, g).deflection == -g.max_deflection);
    // Heading error is taken the short way round.
    CHECK(pid_rudder(pi - 0.05, -pi + 0.05, 0.0, 0.0, g).deflection ==
          doctest::Approx(-4.0 * 0.1).epsilon(1e-12));
  }

  TEST_CASE("rudder rate limit") {
    CHECK(rudder_rate_limit(0.0, 1.0, 0.5, 0.2) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(rudder_rate_limit(0.0, -1.0, 0.5, 0.2) == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(rudder_rate_limit(0.3, 0.35, 0.5, 0.2) == 0.35);
  }

  TEST_CASE("calm water course keeping is a straight line") {
    VesselParams v;
    SimulationOptions o;
    o.duration = 120;
    const auto tr = simulate(v, stabilizing(), calm(), o);
    REQUIRE(tr.size() == 240);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      CHECK(tr.y[i] == 0.0);
      CHECK(tr.yaw[i] == 0.0);
      CHECK(tr.heave[i] == 0.0);
      CHECK(tr.roll[i] == 0.0);
      CHECK(tr.pitch[i] == 0.0);
      CHECK(tr.surge_vel[i] == doctest::Approx(v.nominal_speed).epsilon(1e-14));
      CHECK(tr.x[i] == doctest::Approx(v.nominal_speed * tr.t[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("calm water turning circle reaches the steady turn") {
    VesselParams v;
    PidGains g = stabilizing();
    SimulationOptions o;
    o.mode = RunMode::kTurningCircle;
    o.duration = 600;
    const auto tr = simulate(v, g, calm(), o);
    const auto st = oracle::steady_turn(v, o.turn_rudder);
    const std::size_t n = tr.size() - 1;
    CHECK(tr.yaw_rate[n] == doctest::Approx(st.yaw_rate).epsilon(1e-6));
    CHECK(tr.surge_vel[n] == doctest::Approx(st.speed).epsilon(1e-6));
    CHECK(tr.sway_vel[n] == doctest::Approx(st.sway).epsilon(1e-6));
    for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.yaw[i] > tr.yaw[i - 1]);

    // Last full revolution stays on a circle of the predicted radius.
    const double period = 2 * pi / st.yaw_rate;
    const auto steps = static_cast<std::size_t>(period / tr.dt);
    double cx = 0, cy = 0;
    for (std::size_t i = n - steps; i <= n; ++i) {
      cx += tr.x[i];
      cy += tr.y[i];
    }
    cx /= static_cast<double>(steps + 1);
    cy /= static_cast<double>(steps + 1);
    for (std::size_t i = n - steps; i <= n; ++i) {
      CHECK(std::hypot(tr.x[i] - cx, tr.y[i] - cy) == doctest::Approx(st.radius).epsilon(2e-2));
    }
  }

  TEST_CASE("heave follows the encounter frequency") {
    VesselParams v;
    const double w = 0.6, beta = 0.75 * pi;
    const auto waves = single_component(0.05, w, beta, 0.3);
    SimulationOptions o;
    o.duration = 400;
    const auto tr = simulate(v, stabilizing(), waves, o);
    // Ship moves along +x at nominal speed on heading 0.
    const double we = std::abs(w - waves.kx[0] * v.nominal_speed);
    std::vector<double> tail(tr.heave.begin() + 200, tr.heave.end());
    CHECK(oracle::dominant_frequency(tail, tr.dt, 0.05, 2.5) == doctest::Approx(we).epsilon(5e-3));
  }

  TEST_CASE("halving the integration step") {
    VesselParams v;
    SimulationOptions o;
    o.duration = 360;
    const auto waves = default_sea(31);
    const auto a = simulate(v, stabilizing(), waves, o);
    o.substeps = 8;
    const auto b = simulate(v, stabilizing(), waves, o);
    const std::size_t n = a.size() - 1;
    const double travel = std::hypot(a.x[n], a.y[n]);
    CHECK(std::hypot(a.x[n] - b.x[n], a.y[n] - b.y[n]) < 1e-3 * travel);
  }

  TEST_CASE("determinism and heading regulation") {
    VesselParams v;
    SimulationOptions o;
    o.duration = 360;
    const auto waves = default_sea(8);
    const auto a = simulate(v, stabilizing(), waves, o);
    CHECK(a == simulate(v, stabilizing(), waves, o));
    double mean = 0.0;
    const std::size_t start = 2 * a.size() / 3;
    for (std::size_t i = start; i < a.size(); ++i) mean += std::abs(a.yaw[i]);
    mean /= static_cast<double>(a.size() - start);
    CHECK(mean < 0.05);
  }

  TEST_CASE("unforced oscillators decay") {
    VesselParams v;
    SimulationOptions o;
    o.mode = RunMode::kTurningCircle;
    o.turn_rudder = 0.0;
    o.duration = 200;
    o.initial.heave = 1.0;
    o.initial.roll = 0.2;
    o.initial.pitch = 0.05;
    const auto tr = simulate(v, stabilizing(), calm(), o);
    for (const auto* s : {&tr.heave, &tr.roll, &tr.pitch}) {
      std::vector<double> peaks;
      for (std::size_t i = 1; i + 1 < s->size(); ++i) {
        const double a = std::abs((*s)[i]);
        if (a >= std::abs((*s)[i - 1]) && a > std::abs((*s)[i + 1])) peaks.push_back(a);
      }
      REQUIRE(peaks.size() > 3);
      for (std::size_t k = 1; k < peaks.size(); ++k) CHECK(peaks[k] < peaks[k - 1]);
    }
  }

  TEST_CASE("as-printed derivative sign") {
    // With the sign as printed the loop still holds course in calm water.
    VesselParams v;
    SimulationOptions o;
    o.duration = 60;
    CHECK_NOTHROW(simulate(v, PidGains{}, calm(), o));
  }

  TEST_CASE("trajectory file round trip") {
    VesselParams v;
    SimulationOptions o;
    o.duration = 30;
    auto tr = simulate(v, stabilizing(), default_sea(4), o);
    tr.seed = 77;
    std::stringstream ss;
    write_trajectory(ss, tr);
    CHECK(read_trajectory(ss) == tr);
  }

  TEST_CASE("invalid options") {
    VesselParams v;
    SimulationOptions o;
    o.duration = 10.25;
    CHECK_THROWS_AS(simulate(v, stabilizing(), calm(), o), InvalidArgument);
    o.duration = 10;
    o.substeps = 0;
    CHECK_THROWS_AS(simulate(v, stabilizing(), calm(), o), InvalidArgument);
    VesselParams bad;
    bad.damping_ratios[1] = 0.0;
    CHECK_THROWS_AS(simulate(bad, stabilizing(), calm(), SimulationOptions{}), InvalidArgument);
  }
}

TEST_SUITE("encounter") {
  Trajectory line(double y0, double yaw) {
    Trajectory t;
    t.dt = 0.5;
    for (int i = 0; i < 4; ++i) {
      t.t.push_back(0.5 * i);
      t.x.push_back(i);
      t.y.push_back(y0 + i);
      t.yaw.push_back(yaw);
      for (auto* v : {&t.heave, &t.roll, &t.pitch, &t.surge_vel, &t.sway_vel, &t.yaw_rate, &t.rudder}) {
        v->push_back(0.0);
      }
    }
    return t;
  }

  TEST_CASE("frame is the mean track") {
    std::vector<Trajectory> runs{line(1.0, 0.1), line(3.0, 0.3)};
    runs[0].x[2] = 0.0;
    runs[1].x[2] = 2.0;
    const auto f = estimate_frame(runs);
    CHECK(f.x[2] == doctest::Approx(1.0));
    CHECK(f.y[0] == doctest::Approx(2.0));
    CHECK(f.psi[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(actual_frame(runs[0]) == estimate_frame(std::span(runs.data(), 1)));
    std::vector<Trajectory> swapped{runs[1], runs[0]};
    const auto g = estimate_frame(swapped);
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(g.x[i] == doctest::Approx(f.x[i]).epsilon(1e-15));
      CHECK(g.y[i] == doctest::Approx(f.y[i]).epsilon(1e-15));
      CHECK(g.psi[i] == doctest::Approx(f.psi[i]).epsilon(1e-15));
    }
  }

  TEST_CASE("circular yaw mean across the wrap") {
    std::vector<Trajectory> runs{line(0, pi - 0.1), line(0, -pi + 0.1)};
    const auto f = estimate_frame(runs);
    CHECK(std::abs(wrap_angle(f.psi[0] - pi)) < 1e-12);
  }

  TEST_CASE("ensemble mean of course keeping follows the desired line") {
    VesselParams v;
    SimulationOptions o;
    o.duration = 120;
    std::vector<Trajectory> runs;
    for (std::uint64_t s = 0; s < 30; ++s) runs.push_back(simulate(v, stabilizing(), default_sea(100 + s), o));
    const auto f = estimate_frame(runs);
    double spread = 0.0;
    for (const auto& r : runs) spread = std::max(spread, std::abs(r.y.back()));
    // Mean lateral offset is small next to the run-to-run spread.
    CHECK(std::abs(f.y.back()) < 0.5 * spread + 1.0);
    CHECK(std::abs(f.psi.back()) < 0.05);
  }

  TEST_CASE("turning-circle frame yaw is monotone") {
    VesselParams v;
    SimulationOptions o;
    o.mode = RunMode::kTurningCircle;
    o.duration = 120;
    const auto f = actual_frame(simulate(v, stabilizing(), default_sea(5), o));
    for (std::size_t i = 1; i < f.size(); ++i) CHECK(f.psi[i] > f.psi[i - 1]);
  }

  TEST_CASE("probe layouts") {
    auto one = probe_layout(1, 351.2);
    REQUIRE(one.size() == 1);
    CHECK(one.offsets[0] == Vec2(0, 0));
    const double lp = peak_wavelength(SpectrumParams{});
    auto three = probe_layout(3, lp);
    CHECK(three.offsets[0].x() == doctest::Approx(-lp / 2).epsilon(1e-15));
    CHECK(three.offsets[0].x() == doctest::Approx(-175.6).epsilon(2e-4));
    CHECK(three.offsets[1].x() == 0.0);
    CHECK(three.offsets[2].x() == doctest::Approx(lp / 2).epsilon(1e-15));
    auto many = probe_layout(27, lp);
    REQUIRE(many.size() == 27);
    for (std::size_t i = 0; i < 27; ++i) {
      CHECK(many.offsets[i].y() == 0.0);
      CHECK(many.offsets[i].x() == doctest::Approx(-many.offsets[26 - i].x()).epsilon(1e-14));
    }
    CHECK(many.offsets[13].x() == 0.0);
    CHECK_THROWS_AS(probe_layout(0, lp), InvalidArgument);
  }

  TEST_CASE("rotation") {
    CHECK(rotation(0.0) == Eigen::Matrix2d::Identity());
    const Vec2 q = rotation(pi / 2) * Vec2(1, 0);
    CHECK(q.x() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(q.y() == doctest::Approx(1.0).epsilon(1e-15));
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      const auto r = rotation(rng.uniform() * 20 - 10);
      CHECK((r.transpose() * r - Eigen::Matrix2d::Identity()).norm() < 1e-12);
      CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  EncounterFrame still(std::size_t n, double x, double y, double psi) {
    EncounterFrame f;
    for (std::size_t i = 0; i < n; ++i) {
      f.t.push_back(0.5 * static_cast<double>(i));
      f.x.push_back(x);
      f.y.push_back(y);
      f.psi.push_back(psi);
    }
    return f;
  }

  TEST_CASE("static probes sample the surface") {
    const auto c = default_sea(12);
    const auto layout = probe_layout(5, 200.0);
    const auto f = still(20, 0, 0, 0);
    const auto e = probe_elevations(c, f, layout);
    for (Eigen::Index t = 0; t < e.rows(); ++t) {
      for (Eigen::Index k = 0; k < e.cols(); ++k) {
        CHECK(e(t, k) == doctest::Approx(elevation_at(c, layout.offsets[k], f.t[t])).epsilon(1e-12));
      }
    }
    ProbeLayout unit{{Vec2(1, 0)}};
    const auto r = probe_elevations(c, still(3, 10, 20, pi / 2), unit);
    CHECK(r(2, 0) == doctest::Approx(elevation_at(c, Vec2(10, 21), 1.0)).epsilon(1e-12));
  }

  TEST_CASE("cg probe is a slice of larger layouts") {
    VesselParams v;
    SimulationOptions o;
    o.duration = 60;
    const auto c = default_sea(6);
    const auto f = actual_frame(simulate(v, stabilizing(), c, o));
    const auto a = probe_elevations(c, f, probe_layout(1, 350));
    const auto b = probe_elevations(c, f, probe_layout(27, 350));
    CHECK((a.col(0) - b.col(13)).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("head seas Doppler shift") {
    // Waves from +x run toward -x; a frame moving at +U meets them head on.
    const double w = 0.5, u = 8.0;
    const auto c = single_component(1.0, w, 0.0, 0.0);
    const double k = w * w / kStandardGravity;
    EncounterFrame f;
    for (int i = 0; i < 4000; ++i) {
      f.t.push_back(0.25 * i);
      f.x.push_back(u * 0.25 * i);
      f.y.push_back(0);
      f.psi.push_back(0);
    }
    const auto e = probe_elevations(c, f, probe_layout(1, 1.0));
    std::vector<double> s(e.data(), e.data() + e.rows());
    CHECK(oracle::dominant_frequency(s, 0.25, 0.1, 2.0) == doctest::Approx(w + k * u).epsilon(1e-4));
  }

  TEST_CASE("frame file round trip") {
    const auto f = still(5, 1.5, -2.25, 0.125);
    std::stringstream ss;
    write_frame(ss, f);
    CHECK(read_frame(ss) == f);
  }
}
