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

// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <quadmath.h>

#include "core/lstm.hpp"
#include "core/rng.hpp"
#include "core/vessel.hpp"
#include "core/wavefield.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, shipsi::Rng& rng) {
  return MatrixXd::NullaryExpr(rows, cols, [&] { return rng.uniform(-1.0, 1.0); });
}

// Dropout-free stacked forward, one cell call per step and layer.
inline MatrixXd reference_forward(const shipsi::LstmModel& m, const MatrixXd& seq) {
  std::vector<VectorXd> xs;
  for (Eigen::Index t = 0; t < seq.rows(); ++t) xs.push_back(seq.row(t).transpose());
  for (const auto& layer : m.params.layers) {
    VectorXd h = VectorXd::Zero(layer.units()), c = VectorXd::Zero(layer.units());
    for (auto& x : xs) {
      auto s = shipsi::lstm_cell_forward(x, h, c, layer);
      h = s.h;
      c = s.c;
      x = h;
    }
  }
  MatrixXd out(seq.rows(), m.params.dense_bias.size());
  for (Eigen::Index t = 0; t < seq.rows(); ++t) {
    out.row(t) = (m.params.dense_weights * xs[static_cast<std::size_t>(t)] + m.params.dense_bias)
                     .transpose();
  }
  return out;
}

// Quad-precision network, evaluated with plain loops. Tensors are kept in
// column-major order to line up with LstmParams::tensors().
using quad = __float128;

struct QuadNet {
  std::vector<std::vector<quad>> tensors;
  std::vector<Eigen::Index> units, in_dims;
  Eigen::Index outputs = 0;
  double rate = 0.0;
  shipsi::MaskMode mask_mode = shipsi::MaskMode::kPerSequence;

  explicit QuadNet(const shipsi::LstmModel& m) : rate(m.dropout_rate), mask_mode(m.mask_mode) {
    for (auto t : m.params.tensors()) tensors.emplace_back(t.begin(), t.end());
    for (const auto& l : m.params.layers) {
      units.push_back(l.units());
      in_dims.push_back(l.input_dim());
    }
    outputs = m.params.dense_bias.size();
  }
};

inline quad qsigmoid(quad z) { return 1 / (1 + expq(-z)); }

// Dropout multiplier for unit u at step t of one sequence; mirrors the
// documented seeding rule (one stream per sequence seed and layer).
inline std::vector<double> dropout_mask(double rate, shipsi::MaskMode mode, std::uint64_t seed,
                                        std::size_t layer, Eigen::Index units, Eigen::Index steps) {
  const Eigen::Index reps = mode == shipsi::MaskMode::kPerSequence ? 1 : steps;
  std::vector<double> mask;
  shipsi::Rng rng(shipsi::derive_seed(seed, 0xd509, layer));
  for (Eigen::Index i = 0; i < reps * units; ++i) {
    mask.push_back(rng.uniform() < rate ? 0.0 : 1.0 / (1.0 - rate));
  }
  return mask;
}

// Mean squared error over steps, channels and sequences.
inline quad quad_loss(const QuadNet& net, const std::vector<MatrixXd>& xs,
                      const std::vector<MatrixXd>& ys, const std::vector<std::uint64_t>& seeds) {
  quad total = 0;
  for (std::size_t b = 0; b < xs.size(); ++b) {
    const Eigen::Index steps = xs[b].rows();
    std::vector<std::vector<quad>> seq(static_cast<std::size_t>(steps));
    for (Eigen::Index t = 0; t < steps; ++t) {
      for (Eigen::Index k = 0; k < xs[b].cols(); ++k) seq[t].push_back(xs[b](t, k));
    }
    for (std::size_t l = 0; l < net.units.size(); ++l) {
      const Eigen::Index h = net.units[l], d = net.in_dims[l], rows = 4 * h;
      const auto& w = net.tensors[2 * l];
      const auto& bias = net.tensors[2 * l + 1];
      std::vector<double> mask;
      if (net.rate > 0.0) mask = dropout_mask(net.rate, net.mask_mode, seeds[b], l, h, steps);
      std::vector<quad> hp(h, 0), c(h, 0), z(rows);
      for (Eigen::Index t = 0; t < steps; ++t) {
        for (Eigen::Index r = 0; r < rows; ++r) {
          quad acc = bias[r];
          for (Eigen::Index j = 0; j < h; ++j) acc += w[j * rows + r] * hp[j];
          for (Eigen::Index j = 0; j < d; ++j) acc += w[(h + j) * rows + r] * seq[t][j];
          z[r] = acc;
        }
        std::vector<quad> out(h);
        for (Eigen::Index u = 0; u < h; ++u) {
          const quad f = qsigmoid(z[u]), i = qsigmoid(z[h + u]);
          const quad g = tanhq(z[2 * h + u]), o = qsigmoid(z[3 * h + u]);
          c[u] = f * c[u] + i * g;
          hp[u] = o * tanhq(c[u]);
          out[u] = hp[u];
          if (!mask.empty()) {
            const Eigen::Index off = net.mask_mode == shipsi::MaskMode::kPerSequence ? 0 : t * h;
            out[u] *= mask[off + u];
          }
        }
        seq[t] = out;
      }
    }
    const auto& dw = net.tensors[2 * net.units.size()];
    const auto& db = net.tensors[2 * net.units.size() + 1];
    const Eigen::Index h = net.units.back();
    for (Eigen::Index t = 0; t < steps; ++t) {
      for (Eigen::Index o = 0; o < net.outputs; ++o) {
        quad y = db[o];
        for (Eigen::Index j = 0; j < h; ++j) y += dw[j * net.outputs + o] * seq[t][j];
        const quad e = y - ys[b](t, o);
        total += e * e;
      }
    }
  }
  return total / static_cast<double>(xs.size() * ys[0].size());
}

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
};

// Central differences of the batch loss (frozen dropout masks) against
// backward(). The loss is evaluated in quad precision so the differences are
// not swamped by double rounding on gradients near zero. Relative error is
// |a - n| / max(|a|, |n|, floor).
inline GradientCheck gradient_check(const shipsi::LstmModel& model, Eigen::Index steps,
                                    Eigen::Index probes, double h, std::uint64_t seed,
                                    double floor = 1e-12) {
  shipsi::Rng rng(seed);
  std::vector<MatrixXd> xs{random_matrix(steps, probes, rng), random_matrix(steps, probes, rng)};
  std::vector<MatrixXd> ys{random_matrix(steps, 6, rng), random_matrix(steps, 6, rng)};
  std::vector<std::uint64_t> masks{seed + 1, seed + 2};

  const auto tape = shipsi::forward_tape(model, xs, masks);
  shipsi::LstmParams grads = shipsi::backward(model, tape, ys);
  const auto analytic = grads.tensors();

  QuadNet net(model);
  GradientCheck r;
  for (std::size_t k = 0; k < net.tensors.size(); ++k) {
    for (std::size_t i = 0; i < net.tensors[k].size(); ++i) {
      const quad saved = net.tensors[k][i];
      net.tensors[k][i] = saved + h;
      const quad up = quad_loss(net, xs, ys, masks);
      net.tensors[k][i] = saved - h;
      const quad down = quad_loss(net, xs, ys, masks);
      net.tensors[k][i] = saved;
      const double numeric = static_cast<double>((up - down) / (2 * static_cast<quad>(h)));
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      r.max_relative_error = std::max(r.max_relative_error, std::abs(a - numeric) / denom);
      ++r.parameters;
    }
  }
  return r;
}

// Adaptive Gauss-Kronrod integral of the spectral density on [lo, hi].
inline double spectrum_integral(const shipsi::SpectrumParams& p, double lo, double hi) {
  auto f = [&](double w) { return w <= 0.0 ? 0.0 : shipsi::spectral_density(w, p); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-12);
}

// Steady turn of the reduced-order model with the rudder held at delta and no
// waves: r = K_r delta u / U0 and (U0 - u) / tau = c u r^2. Solved for u by
// bisection on [0, U0].
struct SteadyTurn {
  double speed = 0.0;
  double yaw_rate = 0.0;
  double sway = 0.0;
  double radius = 0.0;
};

inline SteadyTurn steady_turn(const shipsi::VesselParams& p, double delta) {
  const double u0 = p.nominal_speed;
  auto resid = [&](double u) {
    const double r = p.yaw_rudder_gain * delta * u / u0;
    return (u0 - u) / p.surge_time_constant - p.turn_speed_loss * u * r * r;
  };
  double lo = 0.0, hi = u0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (resid(mid) > 0.0 ? lo : hi) = mid;
  }
  SteadyTurn s;
  s.speed = 0.5 * (lo + hi);
  s.yaw_rate = p.yaw_rudder_gain * delta * s.speed / u0;
  s.sway = p.sway_rudder_gain * delta * s.speed / u0;
  s.radius = std::hypot(s.speed, s.sway) / std::abs(s.yaw_rate);
  return s;
}

// Dominant angular frequency of a uniformly sampled signal, by scanning the
// magnitude of its discrete-time Fourier transform and refining with a
// parabola through the peak.
inline double dominant_frequency(const std::vector<double>& x, double dt, double w_lo,
                                 double w_hi, int grid = 4000) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  auto power = [&](double w) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double ph = w * dt * static_cast<double>(i);
      re += (x[i] - mean) * std::cos(ph);
      im += (x[i] - mean) * std::sin(ph);
    }
    return re * re + im * im;
  };
  const double step = (w_hi - w_lo) / grid;
  int best = 0;
  double best_p = -1.0;
  for (int i = 0; i <= grid; ++i) {
    const double p = power(w_lo + step * i);
    if (p > best_p) {
      best_p = p;
      best = i;
    }
  }
  if (best == 0 || best == grid) return w_lo + step * best;
  const double a = power(w_lo + step * (best - 1)), c = power(w_lo + step * (best + 1));
  const double shift = 0.5 * (a - c) / (a - 2.0 * best_p + c);
  return w_lo + step * (best + shift);
}

}  // namespace oracle
