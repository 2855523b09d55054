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
#include <span>
#include <vector>

namespace shipsi {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const AdamOptions&) const = default;
};

// First and second moment estimates, one buffer per parameter tensor.
struct AdamMoments {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;

  // Zero moments shaped like `params`.
  static AdamMoments like(std::span<const std::span<double>> params);
};

// One bias-corrected Adam update. `step_count` is the 1-based index of this
// update. Parameter, gradient and moment tensors must line up one-to-one.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamMoments& moments,
               long step_count, const AdamOptions& options);

// Scales every gradient so their joint L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double clip_gradient_norm(std::span<const std::span<double>> grads, double max_norm);

}  // namespace shipsi
