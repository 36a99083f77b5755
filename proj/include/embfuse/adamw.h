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

#ifndef EMBFUSE_ADAMW_H_
#define EMBFUSE_ADAMW_H_

#include <cstdint>
#include <span>

#include "embfuse/fusion_net.h"

namespace embfuse {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Decoupled decay, applied to weight matrices only.
  double weight_decay = 1e-2;

  void Validate() const;

  bool operator==(const AdamWConfig& other) const = default;
};

// One AdamW update of a flat parameter block at 1-based step `step`:
//   m <- b1 m + (1 - b1) g
//   v <- b2 v + (1 - b2) g^2
//   theta <- theta - lr (m / (1 - b1^t) / (sqrt(v / (1 - b2^t)) + eps) + wd theta)
// with wd = cfg.weight_decay if `decay` else 0. Throws NumericalError, before
// touching anything, if grad has a non-finite entry.
void adamw_update(std::span<double> theta, std::span<const double> grad,
                  std::span<double> m, std::span<double> v, const AdamWConfig& cfg,
                  std::uint64_t step, bool decay);

class AdamWState {
 public:
  AdamWState(std::size_t n_dim, const AdamWConfig& cfg);

  const AdamWConfig& config() const { return cfg_; }
  std::uint64_t step_count() const { return step_count_; }
  const FusionParams& first_moment() const { return m_; }
  const FusionParams& second_moment() const { return v_; }

  // Averages grads over grads.triplet_count (a count of 0 is treated as 1,
  // the sum then being zero) and applies one update to every block.
  void Step(const GradAccum& grads, FusionParams* params);

  bool operator==(const AdamWState& other) const = default;

 private:
  AdamWConfig cfg_;
  FusionParams m_;
  FusionParams v_;
  std::uint64_t step_count_ = 0;
};

}  // namespace embfuse

#endif  // EMBFUSE_ADAMW_H_
