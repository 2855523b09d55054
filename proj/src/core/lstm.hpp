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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "core/dataset.hpp"
#include "core/encounter.hpp"
#include "core/vessel.hpp"

namespace shipsi {

// Row blocks of the stacked gate weights, in storage order.
enum class Gate : int { kForget = 0, kInput = 1, kCandidate = 2, kOutput = 3 };

// One LSTM layer. The four gate matrices W_f, W_i, W_C, W_o are stacked
// row-wise into `weights` (4H x (H + D)); columns follow the concatenation
// [h_prev, x_t]. `bias` stacks b_f, b_i, b_C, b_o the same way.
struct LstmLayerParams {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  Eigen::Index units() const { return bias.size() / 4; }
  Eigen::Index input_dim() const { return weights.cols() - units(); }

  auto gate_weights(Gate g) { return weights.middleRows(static_cast<int>(g) * units(), units()); }
  auto gate_weights(Gate g) const {
    return weights.middleRows(static_cast<int>(g) * units(), units());
  }
  auto gate_bias(Gate g) { return bias.segment(static_cast<int>(g) * units(), units()); }
  auto gate_bias(Gate g) const {
    return bias.segment(static_cast<int>(g) * units(), units());
  }

  void validate() const;
};

// Every trainable tensor of the stacked network. Gradients use the same type.
struct LstmParams {
  std::vector<LstmLayerParams> layers;
  Eigen::MatrixXd dense_weights;  // outputs x H
  Eigen::VectorXd dense_bias;     // outputs

  // Flat views over every tensor, in a fixed order: for each layer its
  // weights then bias, then the dense weights and bias.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;
  std::vector<std::string> tensor_names() const;

  LstmParams zeros_like() const;
  void validate() const;
};

struct CellState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

// One step of a single LSTM cell.
CellState lstm_cell_forward(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                            const Eigen::VectorXd& c_prev, const LstmLayerParams& params);

enum class MaskMode {
  kPerSequence,  // one dropout mask per sequence, held across time steps
  kPerStep,      // fresh mask every time step
};

std::string to_string(MaskMode mode);
std::optional<MaskMode> parse_mask_mode(std::string_view text);

// Stacked LSTM + linear dense head, with the metadata inference needs.
struct LstmModel {
  LstmParams params;
  double dropout_rate = 0.0;
  MaskMode mask_mode = MaskMode::kPerSequence;
  Standardizer input_scaler;
  Standardizer output_scaler;
  RunMode mode = RunMode::kCourseKeeping;
  std::size_t steps = 0;           // T the model was trained on
  ProbeLayout layout;              // probe offsets the inputs came from
  std::uint64_t init_seed = 0;
  double forget_bias = 1.0;

  std::size_t inputs() const { return static_cast<std::size_t>(params.layers.front().input_dim()); }
  std::size_t units() const { return static_cast<std::size_t>(params.layers.front().units()); }
  std::size_t outputs() const { return static_cast<std::size_t>(params.dense_bias.size()); }
  std::size_t layer_count() const { return params.layers.size(); }

  void validate() const;
};

// Weights uniform in +-1/sqrt(fan_in), biases zero except the forget gate.
LstmModel initialize_model(std::size_t inputs, std::size_t units, std::size_t layers,
                           std::size_t outputs, double dropout_rate, std::uint64_t seed,
                           double forget_bias = 1.0);

// Activations cached by a batched forward pass, needed for backpropagation.
// Step t of batch column b lives in column t * B + b of every matrix.
class ForwardTape {
 public:
  bool empty() const { return layers_.empty(); }
  std::size_t batch() const { return batch_; }
  std::size_t steps() const { return steps_; }
  // Network outputs, standardized units, outputs x (T * B).
  const Eigen::MatrixXd& outputs() const { return outputs_; }
  // Output of sequence `b` as a T x outputs matrix.
  Eigen::MatrixXd sequence_output(std::size_t b) const;

 private:
  friend ForwardTape forward_tape(const LstmModel&, std::span<const Eigen::MatrixXd>,
                                  std::span<const std::uint64_t>);
  friend LstmParams backward(const LstmModel&, const ForwardTape&,
                             std::span<const Eigen::MatrixXd>, double*);

  struct Layer {
    Eigen::MatrixXd input;      // D x TB
    Eigen::MatrixXd gates;      // 4H x TB, activated f, i, C~, o
    Eigen::MatrixXd cells;      // H x TB, C_t
    Eigen::MatrixXd tanh_cells; // H x TB
    Eigen::MatrixXd hidden;     // H x TB, h_t before dropout
    Eigen::MatrixXd mask;       // H x B or H x TB (empty when dropout is off)
  };

  std::size_t batch_ = 0;
  std::size_t steps_ = 0;
  std::vector<Layer> layers_;
  Eigen::MatrixXd head_input_;  // H x TB, last layer output after dropout
  Eigen::MatrixXd outputs_;
};

// Forward pass over a batch of equal-length T x K sequences. `mask_seeds`
// is empty for deterministic inference, or holds one seed per sequence to
// sample dropout masks (sequence b's masks depend only on mask_seeds[b]).
ForwardTape forward_tape(const LstmModel& model, std::span<const Eigen::MatrixXd> sequences,
                         std::span<const std::uint64_t> mask_seeds = {});

// Single-sequence forward; returns T x outputs in standardized units.
Eigen::MatrixXd forward(const LstmModel& model, const Eigen::MatrixXd& sequence,
                        std::optional<std::uint64_t> dropout_seed = std::nullopt);

// Batched forward without a tape, for inference on long sequences.
std::vector<Eigen::MatrixXd> forward_batch(const LstmModel& model,
                                           std::span<const Eigen::MatrixXd> sequences,
                                           std::span<const std::uint64_t> mask_seeds = {});

// Mean squared error over time, output channels and batch:
//   L = 1/(B T C) * sum (yhat - y)^2
double sequence_loss(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& target);

// Exact gradients of the batch loss by backpropagation through time.
// Throws if the tape is empty. Writes the loss to `loss` when non-null.
LstmParams backward(const LstmModel& model, const ForwardTape& tape,
                    std::span<const Eigen::MatrixXd> targets, double* loss = nullptr);

}  // namespace shipsi
