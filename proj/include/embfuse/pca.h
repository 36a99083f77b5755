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

#ifndef EMBFUSE_PCA_H_
#define EMBFUSE_PCA_H_

#include <cstddef>
#include <vector>

#include "embfuse/tensor.h"

namespace embfuse {

struct PcaOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 10000;
};

struct Pca2d {
  Vec mean;
  Vec axis1;
  Vec axis2;
  double eigenvalue1 = 0.0;
  double eigenvalue2 = 0.0;
  std::vector<double> x;  // per-sample coordinate on axis1
  std::vector<double> y;  // per-sample coordinate on axis2
};

// Sample covariance (divided by n - 1) of equally long vectors.
Mat covariance(const std::vector<Vec>& samples, Vec* mean_out = nullptr);

// Leading eigenpair of a symmetric matrix by power iteration. The iteration
// stops once successive unit vectors differ by less than the tolerance (in
// max-norm) or after max_iterations. The sign is fixed so that the entry of
// largest magnitude is positive.
double power_iteration(const Mat& sym, const PcaOptions& opt, Vec* eigvec);

// Top-2 principal axes via power iteration with deflation, and the centered
// projection of every sample onto them. Throws ConfigError for fewer than 3
// samples.
Pca2d pca_2d(const std::vector<Vec>& samples, const PcaOptions& opt = {});

}  // namespace embfuse

#endif  // EMBFUSE_PCA_H_
