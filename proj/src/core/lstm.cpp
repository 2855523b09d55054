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

#include "core/lstm.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace shipsi {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  return (1.0 + (-z).exp()).inverse();
}

// Number of time steps whose input projection is computed in one product.
constexpr Index kProjectionChunk = 32;

}  // namespace

// ---------------------------------------------------------------------------
// Parameters

void LstmLayerParams::validate() const {
  if (bias.size() == 0 || bias.size() % 4 != 0) {
    throw InvalidArgument("LSTM bias length must be a positive multiple of 4");
  }
  if (weights.rows() != bias.size() || weights.cols() <= units()) {
    throw InvalidArgument("LSTM weight shape must be 4H x (H + D) with D >= 1");
  }
  if (!weights.allFinite() || !bias.allFinite()) {
    throw InvalidArgument("LSTM parameters must be finite");
  }
}

std::vector<std::span<double>> LstmParams::tensors() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  out.emplace_back(dense_weights.data(), static_cast<std::size_t>(dense_weights.size()));
  out.emplace_back(dense_bias.data(), static_cast<std::size_t>(dense_bias.size()));
  return out;
}

std::vector<std::span<const double>> LstmParams::tensors() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers) {
    out.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  out.emplace_back(dense_weights.data(), static_cast<std::size_t>(dense_weights.size()));
  out.emplace_back(dense_bias.data(), static_cast<std::size_t>(dense_bias.size()));
  return out;
}

std::vector<std::string> LstmParams::tensor_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    names.push_back("layer" + std::to_string(l) + ".weights");
    names.push_back("layer" + std::to_string(l) + ".bias");
  }
  names.emplace_back("dense.weights");
  names.emplace_back("dense.bias");
  return names;
}

LstmParams LstmParams::zeros_like() const {
  LstmParams z;
  for (const auto& l : layers) {
    z.layers.push_back({MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                        VectorXd::Zero(l.bias.size())});
  }
  z.dense_weights = MatrixXd::Zero(dense_weights.rows(), dense_weights.cols());
  z.dense_bias = VectorXd::Zero(dense_bias.size());
  return z;
}

void LstmParams::validate() const {
  if (layers.empty()) throw InvalidArgument("network needs at least one LSTM layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    if (l > 0 && layers[l].input_dim() != layers[l - 1].units()) {
      throw InvalidArgument("LSTM layer " + std::to_string(l) +
                            " input width does not match the previous layer");
    }
  }
  if (dense_weights.cols() != layers.back().units() ||
      dense_weights.rows() != dense_bias.size() || dense_bias.size() == 0) {
    throw InvalidArgument("dense head shape does not match the last LSTM layer");
  }
  if (!dense_weights.allFinite() || !dense_bias.allFinite()) {
    throw InvalidArgument("dense parameters must be finite");
  }
}

CellState lstm_cell_forward(const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev,
                            const LstmLayerParams& p) {
  p.validate();
  const Index h = p.units();
  if (h_prev.size() != h || c_prev.size() != h || x.size() != p.input_dim()) {
    throw InvalidArgument("LSTM cell input sizes do not match the layer");
  }
  VectorXd concat(h + x.size());
  concat << h_prev, x;

  // Scalar libm calls here: this is the plain single-step form, kept exact.
  auto pre = [&](Gate g) -> VectorXd { return p.gate_weights(g) * concat + p.gate_bias(g); };
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  auto th = [](double z) { return std::tanh(z); };
  const VectorXd f = pre(Gate::kForget).unaryExpr(sig);
  const VectorXd i = pre(Gate::kInput).unaryExpr(sig);
  const VectorXd c_tilde = pre(Gate::kCandidate).unaryExpr(th);
  const VectorXd o = pre(Gate::kOutput).unaryExpr(sig);

  CellState s;
  s.c = f.cwiseProduct(c_prev) + i.cwiseProduct(c_tilde);
  s.h = o.cwiseProduct(s.c.unaryExpr(th));
  return s;
}

std::string to_string(MaskMode mode) {
  return mode == MaskMode::kPerSequence ? "sequence" : "step";
}

std::optional<MaskMode> parse_mask_mode(std::string_view text) {
  if (text == "sequence") return MaskMode::kPerSequence;
  if (text == "step") return MaskMode::kPerStep;
  return std::nullopt;
}

void LstmModel::validate() const {
  params.validate();
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw InvalidArgument("dropout rate must lie in [0, 1)");
  }
}

LstmModel initialize_model(std::size_t inputs, std::size_t units, std::size_t layers,
                           std::size_t outputs, double dropout_rate, std::uint64_t seed,
                           double forget_bias) {
  if (inputs == 0 || units == 0 || layers == 0 || outputs == 0) {
    throw InvalidArgument("network dimensions must be positive");
  }
  Rng rng(derive_seed(seed, 0x1417));
  auto uniform_fill = [&](MatrixXd& m, double bound) {
    // Column-major fill order is part of the reproducibility contract.
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
    }
  };

  LstmModel model;
  const auto h = static_cast<Index>(units);
  Index in = static_cast<Index>(inputs);
  for (std::size_t l = 0; l < layers; ++l) {
    LstmLayerParams p;
    p.weights.resize(4 * h, h + in);
    uniform_fill(p.weights, 1.0 / std::sqrt(static_cast<double>(h + in)));
    p.bias = VectorXd::Zero(4 * h);
    p.gate_bias(Gate::kForget).setConstant(forget_bias);
    model.params.layers.push_back(std::move(p));
    in = h;
  }
  model.params.dense_weights.resize(static_cast<Index>(outputs), h);
  uniform_fill(model.params.dense_weights, 1.0 / std::sqrt(static_cast<double>(h)));
  model.params.dense_bias = VectorXd::Zero(static_cast<Index>(outputs));
  model.dropout_rate = dropout_rate;
  model.init_seed = seed;
  model.forget_bias = forget_bias;
  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
// Forward

namespace {

// Packs B sequences (T x D each) into D x (T * B) with step-major columns.
MatrixXd pack_inputs(std::span<const MatrixXd> sequences, Index expected_dim) {
  if (sequences.empty()) throw InvalidArgument("forward pass needs at least one sequence");
  const Index t_len = sequences.front().rows();
  const Index d = sequences.front().cols();
  if (t_len == 0) throw InvalidArgument("sequences must have at least one step");
  if (d != expected_dim) {
    throw InvalidArgument("sequence has " + std::to_string(d) + " features, model expects " +
                          std::to_string(expected_dim));
  }
  const auto b = static_cast<Index>(sequences.size());
  MatrixXd x(d, t_len * b);
  for (Index s = 0; s < b; ++s) {
    const MatrixXd& seq = sequences[static_cast<std::size_t>(s)];
    if (seq.rows() != t_len || seq.cols() != d) {
      throw InvalidArgument("sequences in a batch must share one shape");
    }
    for (Index t = 0; t < t_len; ++t) x.col(t * b + s) = seq.row(t).transpose();
  }
  return x;
}

MatrixXd make_mask(Index units, Index batch, Index steps, double rate, MaskMode mode,
                   std::span<const std::uint64_t> seeds, std::size_t layer) {
  const double keep_scale = 1.0 / (1.0 - rate);
  const Index cols = mode == MaskMode::kPerSequence ? batch : batch * steps;
  MatrixXd mask(units, cols);
  for (Index b = 0; b < batch; ++b) {
    Rng rng(derive_seed(seeds[static_cast<std::size_t>(b)], 0xd509, layer));
    const Index reps = mode == MaskMode::kPerSequence ? 1 : steps;
    for (Index t = 0; t < reps; ++t) {
      const Index col = mode == MaskMode::kPerSequence ? b : t * batch + b;
      for (Index u = 0; u < units; ++u) {
        mask(u, col) = rng.uniform() < rate ? 0.0 : keep_scale;
      }
    }
  }
  return mask;
}

void apply_mask(MatrixXd& values, const MatrixXd& mask, Index batch, Index steps) {
  if (mask.cols() == values.cols()) {
    values.array() *= mask.array();
    return;
  }
  for (Index t = 0; t < steps; ++t) values.middleCols(t * batch, batch).array() *= mask.array();
}

struct LayerStorage {
  MatrixXd* gates = nullptr;
  MatrixXd* cells = nullptr;
  MatrixXd* tanh_cells = nullptr;
};

// Runs one layer over the packed input; returns hidden states H x TB.
MatrixXd run_layer(const LstmLayerParams& p, const MatrixXd& input, Index batch, Index steps,
                   const LayerStorage& store) {
  const Index h = p.units();
  const Index d = p.input_dim();
  const auto w_h = p.weights.leftCols(h);
  const auto w_x = p.weights.rightCols(d);

  MatrixXd hidden(h, steps * batch);
  if (store.gates) {
    store.gates->resize(4 * h, steps * batch);
    store.cells->resize(h, steps * batch);
    store.tanh_cells->resize(h, steps * batch);
  }

  MatrixXd z(4 * h, batch);
  MatrixXd h_prev = MatrixXd::Zero(h, batch);
  MatrixXd c = MatrixXd::Zero(h, batch);
  MatrixXd proj;
  for (Index t0 = 0; t0 < steps; t0 += kProjectionChunk) {
    const Index n = std::min(kProjectionChunk, steps - t0);
    proj.noalias() = w_x * input.middleCols(t0 * batch, n * batch);
    proj.colwise() += p.bias;
    for (Index t = t0; t < t0 + n; ++t) {
      z.noalias() = w_h * h_prev;
      z += proj.middleCols((t - t0) * batch, batch);
      auto za = z.array();
      za.topRows(2 * h) = sigmoid(za.topRows(2 * h));
      za.middleRows(2 * h, h) = za.middleRows(2 * h, h).tanh();
      za.bottomRows(h) = sigmoid(za.bottomRows(h));

      c.array() = za.topRows(h) * c.array() + za.middleRows(h, h) * za.middleRows(2 * h, h);
      auto h_t = hidden.middleCols(t * batch, batch);
      if (store.gates) {
        auto tc = store.tanh_cells->middleCols(t * batch, batch);
        tc = c.array().tanh().matrix();
        h_t = (za.bottomRows(h) * tc.array()).matrix();
        store.gates->middleCols(t * batch, batch) = z;
        store.cells->middleCols(t * batch, batch) = c;
      } else {
        h_t = (za.bottomRows(h) * c.array().tanh()).matrix();
      }
      h_prev = h_t;
    }
  }
  return hidden;
}

void check_seeds(std::span<const MatrixXd> sequences, std::span<const std::uint64_t> seeds) {
  if (!seeds.empty() && seeds.size() != sequences.size()) {
    throw InvalidArgument("need one dropout seed per sequence");
  }
}

MatrixXd unpack_sequence(const MatrixXd& packed, std::size_t b, std::size_t batch,
                         std::size_t steps) {
  MatrixXd out(static_cast<Index>(steps), packed.rows());
  for (std::size_t t = 0; t < steps; ++t) {
    out.row(static_cast<Index>(t)) = packed.col(static_cast<Index>(t * batch + b)).transpose();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd ForwardTape::sequence_output(std::size_t b) const {
  if (b >= batch_) throw InvalidArgument("sequence index out of range");
  return unpack_sequence(outputs_, b, batch_, steps_);
}

ForwardTape forward_tape(const LstmModel& model, std::span<const MatrixXd> sequences,
                         std::span<const std::uint64_t> mask_seeds) {
  model.validate();
  check_seeds(sequences, mask_seeds);
  ForwardTape tape;
  MatrixXd input = pack_inputs(sequences, model.params.layers.front().input_dim());
  const auto batch = static_cast<Index>(sequences.size());
  const Index steps = sequences.front().rows();
  tape.batch_ = sequences.size();
  tape.steps_ = static_cast<std::size_t>(steps);
  const bool dropout = !mask_seeds.empty() && model.dropout_rate > 0.0;

  tape.layers_.resize(model.params.layers.size());
  for (std::size_t l = 0; l < model.params.layers.size(); ++l) {
    auto& layer = tape.layers_[l];
    layer.input = std::move(input);
    layer.hidden = run_layer(model.params.layers[l], layer.input, batch, steps,
                             {&layer.gates, &layer.cells, &layer.tanh_cells});
    input = layer.hidden;
    if (dropout) {
      layer.mask = make_mask(model.params.layers[l].units(), batch, steps, model.dropout_rate,
                             model.mask_mode, mask_seeds, l);
      apply_mask(input, layer.mask, batch, steps);
    }
  }
  tape.head_input_ = std::move(input);
  tape.outputs_.noalias() = model.params.dense_weights * tape.head_input_;
  tape.outputs_.colwise() += model.params.dense_bias;
  return tape;
}

std::vector<MatrixXd> forward_batch(const LstmModel& model, std::span<const MatrixXd> sequences,
                                    std::span<const std::uint64_t> mask_seeds) {
  model.validate();
  check_seeds(sequences, mask_seeds);
  MatrixXd input = pack_inputs(sequences, model.params.layers.front().input_dim());
  const auto batch = static_cast<Index>(sequences.size());
  const Index steps = sequences.front().rows();
  const bool dropout = !mask_seeds.empty() && model.dropout_rate > 0.0;

  for (std::size_t l = 0; l < model.params.layers.size(); ++l) {
    input = run_layer(model.params.layers[l], input, batch, steps, {});
    if (dropout) {
      const MatrixXd mask = make_mask(model.params.layers[l].units(), batch, steps,
                                      model.dropout_rate, model.mask_mode, mask_seeds, l);
      apply_mask(input, mask, batch, steps);
    }
  }
  MatrixXd out = model.params.dense_weights * input;
  out.colwise() += model.params.dense_bias;

  std::vector<MatrixXd> result;
  result.reserve(sequences.size());
  for (std::size_t b = 0; b < sequences.size(); ++b) {
    result.push_back(unpack_sequence(out, b, sequences.size(), static_cast<std::size_t>(steps)));
  }
  return result;
}

MatrixXd forward(const LstmModel& model, const MatrixXd& sequence,
                 std::optional<std::uint64_t> dropout_seed) {
  const std::uint64_t seed = dropout_seed.value_or(0);
  std::span<const std::uint64_t> seeds;
  if (dropout_seed) seeds = std::span<const std::uint64_t>(&seed, 1);
  return forward_batch(model, std::span<const MatrixXd>(&sequence, 1), seeds).front();
}

double sequence_loss(const MatrixXd& prediction, const MatrixXd& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols() ||
      prediction.size() == 0) {
    throw InvalidArgument("prediction and target shapes differ");
  }
  return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
}

// ---------------------------------------------------------------------------
// Backward

LstmParams backward(const LstmModel& model, const ForwardTape& tape,
                    std::span<const MatrixXd> targets, double* loss) {
  if (tape.empty()) {
    throw InvalidArgument("backward pass requires a forward tape; run forward_tape first");
  }
  if (targets.size() != tape.batch()) {
    throw InvalidArgument("need one target sequence per batch element");
  }
  const auto batch = static_cast<Index>(tape.batch());
  const auto steps = static_cast<Index>(tape.steps());
  const Index n_out = model.params.dense_bias.size();

  MatrixXd target(n_out, steps * batch);
  for (Index b = 0; b < batch; ++b) {
    const MatrixXd& y = targets[static_cast<std::size_t>(b)];
    if (y.rows() != steps || y.cols() != n_out) {
      throw InvalidArgument("target shape must be T x outputs");
    }
    for (Index t = 0; t < steps; ++t) target.col(t * batch + b) = y.row(t).transpose();
  }

  const double n = static_cast<double>(target.size());
  MatrixXd d_out = tape.outputs_ - target;
  if (loss) *loss = d_out.squaredNorm() / n;
  d_out *= 2.0 / n;

  LstmParams grads;
  grads.layers.resize(model.params.layers.size());
  grads.dense_weights.noalias() = d_out * tape.head_input_.transpose();
  grads.dense_bias = d_out.rowwise().sum();

  MatrixXd d_y = model.params.dense_weights.transpose() * d_out;  // H x TB

  for (std::size_t li = model.params.layers.size(); li-- > 0;) {
    const LstmLayerParams& p = model.params.layers[li];
    const auto& cache = tape.layers_[li];
    const Index h = p.units();
    if (cache.mask.size() > 0) apply_mask(d_y, cache.mask, batch, steps);

    MatrixXd d_z(4 * h, steps * batch);
    MatrixXd dh_next = MatrixXd::Zero(h, batch);
    MatrixXd dc_next = MatrixXd::Zero(h, batch);
    MatrixXd dh(h, batch), dc(h, batch);
    const auto w_h = p.weights.leftCols(h);

    for (Index t = steps - 1; t >= 0; --t) {
      const auto g = cache.gates.middleCols(t * batch, batch).array();
      const auto f = g.topRows(h);
      const auto i = g.middleRows(h, h);
      const auto c_tilde = g.middleRows(2 * h, h);
      const auto o = g.bottomRows(h);
      const auto tc = cache.tanh_cells.middleCols(t * batch, batch).array();

      dh = d_y.middleCols(t * batch, batch) + dh_next;
      dc.array() = dh.array() * o * (1.0 - tc.square()) + dc_next.array();

      auto dz = d_z.middleCols(t * batch, batch).array();
      if (t > 0) {
        dz.topRows(h) = dc.array() * cache.cells.middleCols((t - 1) * batch, batch).array() *
                        f * (1.0 - f);
      } else {
        dz.topRows(h).setZero();
      }
      dz.middleRows(h, h) = dc.array() * c_tilde * i * (1.0 - i);
      dz.middleRows(2 * h, h) = dc.array() * i * (1.0 - c_tilde.square());
      dz.bottomRows(h) = dh.array() * tc * o * (1.0 - o);

      dc_next.array() = dc.array() * f;
      dh_next.noalias() = w_h.transpose() * d_z.middleCols(t * batch, batch);
    }

    LstmLayerParams& gl = grads.layers[li];
    gl.weights.resize(p.weights.rows(), p.weights.cols());
    if (steps > 1) {
      gl.weights.leftCols(h).noalias() = d_z.rightCols((steps - 1) * batch) *
                                         cache.hidden.leftCols((steps - 1) * batch).transpose();
    } else {
      gl.weights.leftCols(h).setZero();
    }
    gl.weights.rightCols(p.input_dim()).noalias() = d_z * cache.input.transpose();
    gl.bias = d_z.rowwise().sum();

    if (li > 0) d_y.noalias() = p.weights.rightCols(p.input_dim()).transpose() * d_z;
  }
  return grads;
}

}  // namespace shipsi
