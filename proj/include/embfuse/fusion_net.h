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

#ifndef EMBFUSE_FUSION_NET_H_
#define EMBFUSE_FUSION_NET_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "embfuse/tensor.h"

namespace embfuse {

// Weights of the shared fusion MLP: (noisy || enhanced) [2N] -> N -> N -> N,
// ReLU after the first two layers and a linear output. Every branch of the
// Siamese setup (query, reference, or anchor/positive/negative) runs through
// this one parameter set.
struct FusionParams {
  std::size_t n_dim = 0;
  Mat w1;  // N x 2N
  Vec b1;
  Mat w2;  // N x N
  Vec b2;
  Mat w3;  // N x N
  Vec b3;

  static FusionParams Zeros(std::size_t n_dim);

  // 4N^2 + 3N.
  static std::size_t ParameterCount(std::size_t n_dim);
  std::size_t parameter_count() const { return ParameterCount(n_dim); }

  // Throws DimensionError on inconsistent shapes, NumericalError on
  // non-finite entries.
  void Validate() const;

  struct Block {
    std::span<double> values;
    bool is_weight;
    const char* name;
  };
  struct ConstBlock {
    std::span<const double> values;
    bool is_weight;
    const char* name;
  };

  // Parameter storage in serialization order: w1, b1, w2, b2, w3, b3.
  std::array<Block, 6> blocks();
  std::array<ConstBlock, 6> blocks() const;

  bool operator==(const FusionParams& other) const = default;
};

// A trained network together with its input convention.
struct FusionModel {
  FusionParams params;
  bool normalize_inputs = true;

  bool operator==(const FusionModel& other) const = default;
};

// Intermediates of one forward pass, kept for backpropagation.
struct ForwardTrace {
  Vec input;  // (noisy || enhanced), after optional L2 normalization
  Vec pre1;
  Vec act1;
  Vec pre2;
  Vec act2;
  Vec pre3;  // also the fused embedding

  const Vec& output() const { return pre3; }
};

// Batch-summed gradients for one parameter set.
struct GradAccum {
  FusionParams sum;
  std::size_t triplet_count = 0;

  explicit GradAccum(std::size_t n_dim) : sum(FusionParams::Zeros(n_dim)) {}

  // Element-wise sum; the caller fixes the merge order for reproducibility.
  void Merge(const GradAccum& other);
  void Clear();
};

// He-style uniform init: weights ~ U(-s, s), s = sqrt(6 / fan_in), drawn for
// w1, w2, w3 in row-major order; biases zero.
FusionParams init_params(std::size_t n_dim, Rng& rng);

// Throws DimensionError on length mismatch and DegenerateInputError for a
// zero-norm input when normalization is requested.
ForwardTrace fuse_forward(const FusionParams& params, const Vec& noisy,
                          const Vec& enhanced, bool normalize_inputs);

inline Vec fuse(const FusionModel& model, const Vec& noisy, const Vec& enhanced) {
  return fuse_forward(model.params, noisy, enhanced, model.normalize_inputs).pre3;
}

// Adds dL/dparams to accum given dL/doutput for a trace produced under the
// same params. ReLU'(0) is taken as 0.
void fuse_backward(const FusionParams& params, const ForwardTrace& trace,
                   const Vec& grad_output, GradAccum* accum);

// Model file, little-endian:
//   "EFUS" | u32 version=1 | u32 n_dim | u8 normalize_inputs |
//   f64 payload (w1 row-major, b1, w2, b2, w3, b3) | u64 fnv1a64
// The checksum covers every byte before it. Input order is fixed to
// (noisy || enhanced) for version 1.
void save_model(const FusionModel& model, const std::string& path);
FusionModel load_model(const std::string& path);

std::vector<std::uint8_t> encode_model(const FusionModel& model);
FusionModel decode_model(std::span<const std::uint8_t> bytes);

}  // namespace embfuse

#endif  // EMBFUSE_FUSION_NET_H_
