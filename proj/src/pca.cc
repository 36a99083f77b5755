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

#include "embfuse/pca.h"

#include <algorithm>
#include <cmath>

#include "embfuse/errors.h"

namespace embfuse {

namespace {

void FixSign(Vec* v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v->size(); ++i) {
    if (std::abs((*v)[i]) > std::abs((*v)[best])) best = i;
  }
  if ((*v)[best] < 0.0) *v *= -1.0;
}

}  // namespace

Mat covariance(const std::vector<Vec>& samples, Vec* mean_out) {
  if (samples.size() < 2) throw ConfigError("covariance: need at least two samples");
  const std::size_t d = samples.front().size();
  Vec mean(d);
  for (const Vec& s : samples) {
    if (s.size() != d) throw DimensionError("covariance: samples differ in length");
    mean += s;
  }
  mean *= 1.0 / static_cast<double>(samples.size());

  Mat cov(d, d);
  for (const Vec& s : samples) {
    const Vec c = s - mean;
    add_outer(c, c, &cov);
  }
  for (double& v : cov.span()) v /= static_cast<double>(samples.size() - 1);
  if (mean_out) *mean_out = std::move(mean);
  return cov;
}

double power_iteration(const Mat& sym, const PcaOptions& opt, Vec* eigvec) {
  const std::size_t d = sym.rows();
  // Fixed start so the result does not depend on any external RNG state.
  Rng rng(0x5eed5eed5eedULL);
  Vec v = rng.unit_vec(d);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    Vec next = matvec(sym, v);
    const double n = norm2(next);
    if (n == 0.0) {
      // v lies in the null space; any unit vector there is an eigenvector.
      break;
    }
    next *= 1.0 / n;
    FixSign(&next);
    double delta = 0.0;
    for (std::size_t i = 0; i < d; ++i) delta = std::max(delta, std::abs(next[i] - v[i]));
    v = std::move(next);
    if (delta < opt.tolerance) break;
  }
  FixSign(&v);
  const double lambda = dot(v, matvec(sym, v));
  *eigvec = std::move(v);
  return lambda;
}

Pca2d pca_2d(const std::vector<Vec>& samples, const PcaOptions& opt) {
  if (samples.size() < 3) {
    throw ConfigError("projection needs at least 3 samples, got " +
                      std::to_string(samples.size()));
  }
  Pca2d out;
  Mat cov = covariance(samples, &out.mean);
  out.eigenvalue1 = power_iteration(cov, opt, &out.axis1);
  // Deflate: cov -= lambda1 * v1 v1^T
  add_outer((-out.eigenvalue1) * out.axis1, out.axis1, &cov);
  out.eigenvalue2 = power_iteration(cov, opt, &out.axis2);

  out.x.reserve(samples.size());
  out.y.reserve(samples.size());
  for (const Vec& s : samples) {
    const Vec c = s - out.mean;
    out.x.push_back(dot(c, out.axis1));
    out.y.push_back(dot(c, out.axis2));
  }
  return out;
}

}  // namespace embfuse
