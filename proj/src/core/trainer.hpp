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
#include <functional>
#include <vector>

#include "core/adam.hpp"
#include "core/dataset.hpp"
#include "core/lstm.hpp"

namespace shipsi {

struct TrainOptions {
  std::size_t units = 250;
  std::size_t layers = 3;
  double dropout = 0.1;
  AdamOptions adam{1e-5, 0.9, 0.999, 1e-8};
  std::size_t epochs = 2000;
  // Runs per optimizer step; 0 trains full-batch over all runs.
  std::size_t batch_runs = 0;
  std::uint64_t seed = 0;
  double forget_bias = 1.0;
  // Joint gradient-norm cap; 0 disables clipping.
  double clip_norm = 0.0;
  MaskMode mask_mode = MaskMode::kPerSequence;
  bool operator==(const TrainOptions&) const = default;
};

struct TrainResult {
  LstmModel model;
  // Mean training loss of each epoch, measured on the forward passes that
  // produced that epoch's updates (dropout active).
  std::vector<double> loss_history;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

// Whole-sequence BPTT with Adam. Deterministic for fixed data and options.
// Throws DivergenceError (with the 1-based epoch) if the loss turns non-finite.
TrainResult train(const DatasetTensors& data, const TrainOptions& options,
                  const EpochCallback& on_epoch = {});

// Dropout seed the trainer uses for one sequence, exposed for tests.
std::uint64_t training_mask_seed(std::uint64_t seed, std::size_t epoch, std::size_t run);

}  // namespace shipsi
