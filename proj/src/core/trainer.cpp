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

#include "core/trainer.hpp"

#include <cmath>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace shipsi {

std::uint64_t training_mask_seed(std::uint64_t seed, std::size_t epoch, std::size_t run) {
  return derive_seed(derive_seed(seed, 0x7a1, epoch), 0x3a5c, run);
}

TrainResult train(const DatasetTensors& data, const TrainOptions& opt,
                  const EpochCallback& on_epoch) {
  data.validate();
  if (data.runs() == 0) throw InvalidArgument("training needs at least one run");

  TrainResult result;
  LstmModel& model = result.model;
  model = initialize_model(data.probes(), opt.units, opt.layers, kDofCount, opt.dropout,
                           opt.seed, opt.forget_bias);
  model.mask_mode = opt.mask_mode;
  model.input_scaler = data.input_scaler;
  model.output_scaler = data.output_scaler;
  model.mode = data.mode;
  model.steps = data.steps();

  const std::size_t m = data.runs();
  const std::size_t batch = opt.batch_runs == 0 ? m : std::min(opt.batch_runs, m);

  auto params = model.params.tensors();
  AdamMoments moments = AdamMoments::like(params);
  long step = 0;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(opt.seed, 0x5f1e));

  std::vector<Eigen::MatrixXd> xs, ys;
  std::vector<std::uint64_t> seeds;
  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    if (batch < m) {
      for (std::size_t i = m - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<std::size_t>(shuffle_rng.below(i + 1))]);
      }
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < m; start += batch) {
      const std::size_t end = std::min(m, start + batch);
      xs.clear();
      ys.clear();
      seeds.clear();
      for (std::size_t j = start; j < end; ++j) {
        xs.push_back(data.inputs[order[j]]);
        ys.push_back(data.outputs[order[j]]);
        seeds.push_back(training_mask_seed(opt.seed, epoch, order[j]));
      }
      const ForwardTape tape = forward_tape(model, xs, seeds);
      double loss = 0.0;
      LstmParams grads = backward(model, tape, ys, &loss);
      if (!std::isfinite(loss)) {
        throw DivergenceError("training loss became non-finite in epoch " +
                                  std::to_string(epoch),
                              static_cast<long>(epoch));
      }
      epoch_loss += loss * static_cast<double>(end - start);

      auto grad_views = grads.tensors();
      if (opt.clip_norm > 0.0) clip_gradient_norm(grad_views, opt.clip_norm);
      std::vector<std::span<const double>> const_grads(grad_views.begin(), grad_views.end());
      adam_step(params, const_grads, moments, ++step, opt.adam);
    }
    epoch_loss /= static_cast<double>(m);
    if (!model.params.dense_weights.allFinite()) {
      throw DivergenceError("parameters became non-finite in epoch " + std::to_string(epoch),
                            static_cast<long>(epoch));
    }
    result.loss_history.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  return result;
}

}  // namespace shipsi
