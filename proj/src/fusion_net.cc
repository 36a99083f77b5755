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

#include "embfuse/fusion_net.h"

#include <cassert>
#include <cmath>
#include <string>

#include "embfuse/binary_io.h"
#include "embfuse/errors.h"

namespace embfuse {

namespace {

constexpr char kModelMagic[] = "EFUS";
constexpr std::uint32_t kModelVersion = 1;
// magic + version + n_dim + flag
constexpr std::size_t kModelHeaderBytes = 4 + 4 + 4 + 1;

void CheckShape(const Mat& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string("FusionParams: ") + name + " is " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         ", expected " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

void CheckShape(const Vec& v, std::size_t len, const char* name) {
  if (v.size() != len) {
    throw DimensionError(std::string("FusionParams: ") + name + " has length " +
                         std::to_string(v.size()) + ", expected " +
                         std::to_string(len));
  }
}

void Relu(const Vec& pre, Vec* act) {
  *act = pre;
  for (double& v : *act) {
    if (!(v > 0.0)) v = 0.0;
  }
}

// grad *= relu'(pre)
void MaskByRelu(const Vec& pre, Vec* grad) {
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (!(pre[i] > 0.0)) (*grad)[i] = 0.0;
  }
}

void FillUniform(Mat* m, double bound, Rng& rng) {
  for (double& v : m->span()) v = rng.uniform(-bound, bound);
}

}  // namespace

FusionParams FusionParams::Zeros(std::size_t n_dim) {
  FusionParams p;
  p.n_dim = n_dim;
  p.w1 = Mat(n_dim, 2 * n_dim);
  p.b1 = Vec(n_dim);
  p.w2 = Mat(n_dim, n_dim);
  p.b2 = Vec(n_dim);
  p.w3 = Mat(n_dim, n_dim);
  p.b3 = Vec(n_dim);
  return p;
}

std::size_t FusionParams::ParameterCount(std::size_t n_dim) {
  return 4 * n_dim * n_dim + 3 * n_dim;
}

void FusionParams::Validate() const {
  if (n_dim == 0) throw DimensionError("FusionParams: n_dim must be positive");
  CheckShape(w1, n_dim, 2 * n_dim, "w1");
  CheckShape(b1, n_dim, "b1");
  CheckShape(w2, n_dim, n_dim, "w2");
  CheckShape(b2, n_dim, "b2");
  CheckShape(w3, n_dim, n_dim, "w3");
  CheckShape(b3, n_dim, "b3");
  for (const auto& block : blocks()) {
    if (!all_finite(block.values)) {
      throw NumericalError(std::string("FusionParams: non-finite entry in ") +
                           block.name);
    }
  }
}

std::array<FusionParams::Block, 6> FusionParams::blocks() {
  return {{{w1.span(), true, "w1"},
           {b1.span(), false, "b1"},
           {w2.span(), true, "w2"},
           {b2.span(), false, "b2"},
           {w3.span(), true, "w3"},
           {b3.span(), false, "b3"}}};
}

std::array<FusionParams::ConstBlock, 6> FusionParams::blocks() const {
  return {{{w1.span(), true, "w1"},
           {b1.span(), false, "b1"},
           {w2.span(), true, "w2"},
           {b2.span(), false, "b2"},
           {w3.span(), true, "w3"},
           {b3.span(), false, "b3"}}};
}

void GradAccum::Merge(const GradAccum& other) {
  if (other.sum.n_dim != sum.n_dim) {
    throw DimensionError("GradAccum::Merge: n_dim mismatch");
  }
  auto dst = sum.blocks();
  const auto src = other.sum.blocks();
  for (std::size_t b = 0; b < dst.size(); ++b) {
    for (std::size_t i = 0; i < dst[b].values.size(); ++i) {
      dst[b].values[i] += src[b].values[i];
    }
  }
  triplet_count += other.triplet_count;
}

void GradAccum::Clear() {
  for (auto& block : sum.blocks()) {
    for (double& v : block.values) v = 0.0;
  }
  triplet_count = 0;
}

FusionParams init_params(std::size_t n_dim, Rng& rng) {
  if (n_dim == 0) throw DimensionError("init_params: n_dim must be positive");
  FusionParams p = FusionParams::Zeros(n_dim);
  FillUniform(&p.w1, std::sqrt(6.0 / static_cast<double>(2 * n_dim)), rng);
  FillUniform(&p.w2, std::sqrt(6.0 / static_cast<double>(n_dim)), rng);
  FillUniform(&p.w3, std::sqrt(6.0 / static_cast<double>(n_dim)), rng);
  return p;
}

ForwardTrace fuse_forward(const FusionParams& params, const Vec& noisy,
                          const Vec& enhanced, bool normalize_inputs) {
  if (noisy.size() != params.n_dim || enhanced.size() != params.n_dim) {
    throw DimensionError("fuse_forward: embeddings of length " +
                         std::to_string(noisy.size()) + "/" +
                         std::to_string(enhanced.size()) + " for a model with n_dim " +
                         std::to_string(params.n_dim));
  }
  ForwardTrace t;
  t.input = normalize_inputs ? concat(normalized(noisy), normalized(enhanced))
                             : concat(noisy, enhanced);
  t.pre1 = matvec(params.w1, t.input) + params.b1;
  Relu(t.pre1, &t.act1);
  t.pre2 = matvec(params.w2, t.act1) + params.b2;
  Relu(t.pre2, &t.act2);
  t.pre3 = matvec(params.w3, t.act2) + params.b3;
  return t;
}

void fuse_backward(const FusionParams& params, const ForwardTrace& trace,
                   const Vec& grad_output, GradAccum* accum) {
  assert(accum != nullptr);
  const std::size_t n = params.n_dim;
  if (grad_output.size() != n || trace.input.size() != 2 * n ||
      trace.pre1.size() != n || trace.pre2.size() != n || accum->sum.n_dim != n) {
    throw DimensionError("fuse_backward: trace/gradient shape does not match params");
  }
  FusionParams& g = accum->sum;

  add_outer(grad_output, trace.act2, &g.w3);
  g.b3 += grad_output;

  Vec delta2 = matvec_transposed(params.w3, grad_output);
  MaskByRelu(trace.pre2, &delta2);
  add_outer(delta2, trace.act1, &g.w2);
  g.b2 += delta2;

  Vec delta1 = matvec_transposed(params.w2, delta2);
  MaskByRelu(trace.pre1, &delta1);
  add_outer(delta1, trace.input, &g.w1);
  g.b1 += delta1;
}

std::vector<std::uint8_t> encode_model(const FusionModel& model) {
  model.params.Validate();
  ByteWriter w;
  w.put_bytes(std::string_view(kModelMagic, 4));
  w.put_u32(kModelVersion);
  w.put_u32(static_cast<std::uint32_t>(model.params.n_dim));
  w.put_u8(model.normalize_inputs ? 1 : 0);
  for (const auto& block : model.params.blocks()) {
    for (double v : block.values) w.put_f64(v);
  }
  w.put_checksum();
  return w.bytes();
}

FusionModel decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "model file");
  if (r.get_bytes(4) != std::string_view(kModelMagic, 4)) {
    throw FormatError("model file: bad magic (expected EFUS)");
  }
  const std::uint32_t version = r.get_u32();
  if (version != kModelVersion) {
    throw FormatError("model file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t n_dim = r.get_u32();
  if (n_dim == 0) throw FormatError("model file: n_dim is zero");
  const std::uint8_t flag = r.get_u8();
  if (flag > 1) throw FormatError("model file: bad normalize_inputs flag");

  const std::size_t expected =
      kModelHeaderBytes + 8 * FusionParams::ParameterCount(n_dim) + 8;
  if (bytes.size() != expected) {
    throw FormatError("model file: length " + std::to_string(bytes.size()) +
                      " does not match n_dim " + std::to_string(n_dim) +
                      " (expected " + std::to_string(expected) + ")");
  }

  FusionModel model;
  model.normalize_inputs = flag == 1;
  model.params = FusionParams::Zeros(n_dim);
  for (auto& block : model.params.blocks()) {
    for (double& v : block.values) v = r.get_f64();
  }
  r.verify_checksum();
  try {
    model.params.Validate();
  } catch (const NumericalError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  return model;
}

void save_model(const FusionModel& model, const std::string& path) {
  write_file_bytes(path, encode_model(model));
}

FusionModel load_model(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return decode_model(bytes);
}

}  // namespace embfuse
