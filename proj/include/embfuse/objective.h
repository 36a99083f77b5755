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

#ifndef EMBFUSE_OBJECTIVE_H_
#define EMBFUSE_OBJECTIVE_H_

#include "embfuse/tensor.h"

namespace embfuse {

struct TripletLossCfg {
  double margin_alpha = 0.25;

  // Throws ConfigError unless margin_alpha is in (0, 2].
  void Validate() const;
};

// 1 - x.y / (||x|| ||y||), in [0, 2]. No smoothing is applied: a zero-norm
// operand throws DegenerateInputError, a length mismatch DimensionError.
double cosine_distance(const Vec& x, const Vec& y);

// 1 - cosine_distance(x, y).
double cosine_similarity(const Vec& x, const Vec& y);

// d cosine_distance(x, y) / dx = -(y / (||x|| ||y||) - cos * x / ||x||^2).
// Orthogonal to x.
Vec cosine_distance_grad_x(const Vec& x, const Vec& y);

// max(0, d(a, p) - d(a, n) + alpha).
double triplet_loss(const Vec& anchor, const Vec& positive, const Vec& negative,
                    const TripletLossCfg& cfg);

struct TripletGrad {
  double loss = 0.0;
  Vec anchor;
  Vec positive;
  Vec negative;
};

// Loss together with its gradient with respect to the three embeddings.
// The gradient is zero unless the slack d(a,p) - d(a,n) + alpha is strictly
// positive; the hinge boundary takes the zero subgradient.
TripletGrad triplet_loss_grad(const Vec& anchor, const Vec& positive,
                              const Vec& negative, const TripletLossCfg& cfg);

}  // namespace embfuse

#endif  // EMBFUSE_OBJECTIVE_H_
