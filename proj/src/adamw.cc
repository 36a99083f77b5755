// Copyright (c) 2026 The embfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "embfuse/adamw.h"

#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "embfuse/errors.h"

namespace embfuse {

void AdamWConfig::Validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight_decay must be non-negative");
  }
}

void adamw_update(std::span<double> theta, std::span<const double> grad,
                  std::span<double> m, std::span<double> v, const AdamWConfig& cfg,
                  std::uint64_t step, bool decay) {
  assert(step >= 1);
  if (grad.size() != theta.size() || m.size() != theta.size() ||
      v.size() != theta.size()) {
    throw DimensionError("adamw_update: block sizes differ");
  }
  if (!all_finite(grad)) throw NumericalError("adamw_update: non-finite gradient");

  const double t = static_cast<double>(step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  const double wd = decay ? cfg.weight_decay : 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    theta[i] -= cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + wd * theta[i]);
  }
}

AdamWState::AdamWState(std::size_t n_dim, const AdamWConfig& cfg)
    : cfg_(cfg), m_(FusionParams::Zeros(n_dim)), v_(FusionParams::Zeros(n_dim)) {
  cfg_.Validate();
}

void AdamWState::Step(const GradAccum& grads, FusionParams* params) {
  assert(params != nullptr);
  if (grads.sum.n_dim != m_.n_dim || params->n_dim != m_.n_dim) {
    throw DimensionError("AdamWState::Step: n_dim mismatch");
  }
  const auto g_blocks = grads.sum.blocks();
  for (const auto& block : g_blocks) {
    if (!all_finite(block.values)) {
      throw NumericalError(std::string("AdamW: non-finite gradient in ") + block.name);
    }
  }

  const double scale =
      grads.triplet_count > 0 ? 1.0 / static_cast<double>(grads.triplet_count) : 1.0;
  auto p_blocks = params->blocks();
  auto m_blocks = m_.blocks();
  auto v_blocks = v_.blocks();
  const std::uint64_t step = step_count_ + 1;
  std::vector<double> avg;
  for (std::size_t b = 0; b < p_blocks.size(); ++b) {
    avg.assign(g_blocks[b].values.begin(), g_blocks[b].values.end());
    for (double& x : avg) x *= scale;
    adamw_update(p_blocks[b].values, avg, m_blocks[b].values, v_blocks[b].values, cfg_,
                 step, p_blocks[b].is_weight);
  }
  step_count_ = step;
}

}  // namespace embfuse
