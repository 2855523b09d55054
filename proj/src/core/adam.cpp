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

#include "core/adam.hpp"

#include <cmath>

#include "core/error.hpp"

namespace shipsi {

AdamMoments AdamMoments::like(std::span<const std::span<double>> params) {
  AdamMoments m;
  for (const auto& p : params) {
    m.first.emplace_back(p.size(), 0.0);
    m.second.emplace_back(p.size(), 0.0);
  }
  return m;
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamMoments& moments,
               long step_count, const AdamOptions& o) {
  if (step_count < 1) throw InvalidArgument("Adam step count must be at least 1");
  if (grads.size() != params.size() || moments.first.size() != params.size() ||
      moments.second.size() != params.size()) {
    throw InvalidArgument("Adam parameter, gradient and moment lists differ in length");
  }
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(step_count));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k];
    auto g = grads[k];
    auto& m = moments.first[k];
    auto& v = moments.second[k];
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
      throw InvalidArgument("Adam tensor " + std::to_string(k) + " has mismatched sizes");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

double clip_gradient_norm(std::span<const std::span<double>> grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (const auto& g : grads) {
      for (double& v : g) v *= s;
    }
  }
  return norm;
}

}  // namespace shipsi
