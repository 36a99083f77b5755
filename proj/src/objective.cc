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

#include "embfuse/objective.h"

#include <algorithm>
#include <string>

#include "embfuse/errors.h"

namespace embfuse {

namespace {

struct CosineParts {
  double norm_x;
  double norm_y;
  double cos;
};

CosineParts Cosine(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) {
    throw DimensionError("cosine: length mismatch (" + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()) + ")");
  }
  const double nx = norm2(x);
  const double ny = norm2(y);
  if (nx == 0.0 || ny == 0.0) {
    throw DegenerateInputError("cosine: zero-norm embedding");
  }
  // Rounding can push |cos| a hair past 1.
  const double c = std::clamp(dot(x, y) / (nx * ny), -1.0, 1.0);
  return {nx, ny, c};
}

Vec DistanceGrad(const Vec& x, const Vec& y, const CosineParts& parts) {
  Vec g(x.size());
  const double a = 1.0 / (parts.norm_x * parts.norm_y);
  const double b = parts.cos / (parts.norm_x * parts.norm_x);
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = b * x[i] - a * y[i];
  return g;
}

}  // namespace

void TripletLossCfg::Validate() const {
  if (!(margin_alpha > 0.0 && margin_alpha <= 2.0)) {
    throw ConfigError("triplet margin must lie in (0, 2], got " +
                      std::to_string(margin_alpha));
  }
}

double cosine_distance(const Vec& x, const Vec& y) { return 1.0 - Cosine(x, y).cos; }

double cosine_similarity(const Vec& x, const Vec& y) { return Cosine(x, y).cos; }

Vec cosine_distance_grad_x(const Vec& x, const Vec& y) {
  return DistanceGrad(x, y, Cosine(x, y));
}

double triplet_loss(const Vec& anchor, const Vec& positive, const Vec& negative,
                    const TripletLossCfg& cfg) {
  const double slack = cosine_distance(anchor, positive) -
                       cosine_distance(anchor, negative) + cfg.margin_alpha;
  return std::max(0.0, slack);
}

TripletGrad triplet_loss_grad(const Vec& anchor, const Vec& positive,
                              const Vec& negative, const TripletLossCfg& cfg) {
  const CosineParts ap = Cosine(anchor, positive);
  const CosineParts an = Cosine(anchor, negative);
  const double slack = (1.0 - ap.cos) - (1.0 - an.cos) + cfg.margin_alpha;

  TripletGrad out;
  out.anchor = Vec(anchor.size());
  out.positive = Vec(positive.size());
  out.negative = Vec(negative.size());
  if (!(slack > 0.0)) return out;

  out.loss = slack;
  // L = d(a,p) - d(a,n) + alpha; d is symmetric, so d d(a,p)/dp uses the
  // same formula with the roles swapped.
  const CosineParts pa{ap.norm_y, ap.norm_x, ap.cos};
  const CosineParts na{an.norm_y, an.norm_x, an.cos};
  out.anchor = DistanceGrad(anchor, positive, ap) - DistanceGrad(anchor, negative, an);
  out.positive = DistanceGrad(positive, anchor, pa);
  out.negative = -1.0 * DistanceGrad(negative, anchor, na);
  return out;
}

}  // namespace embfuse
