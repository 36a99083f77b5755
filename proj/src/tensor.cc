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

#include "embfuse/tensor.h"

#include <cassert>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "embfuse/errors.h"

namespace embfuse {

namespace {

void CheckSameSize(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

Vec::Vec(std::size_t len, double fill) : data_(len, fill) {}

Vec::Vec(std::initializer_list<double> values) : data_(values) {
  if (!all_finite(data_)) throw NumericalError("Vec: non-finite entry");
}

Vec::Vec(std::vector<double> values) : data_(std::move(values)) {
  if (!all_finite(data_)) throw NumericalError("Vec: non-finite entry");
}

Vec& Vec::operator+=(const Vec& other) {
  CheckSameSize(size(), other.size(), "Vec +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vec& Vec::operator-=(const Vec& other) {
  CheckSameSize(size(), other.size(), "Vec -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vec& Vec::operator*=(double scale) {
  for (double& v : data_) v *= scale;
  return *this;
}

Vec operator+(Vec lhs, const Vec& rhs) { return lhs += rhs; }
Vec operator-(Vec lhs, const Vec& rhs) { return lhs -= rhs; }
Vec operator*(double scale, Vec v) { return v *= scale; }

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  CheckSameSize(data_.size(), rows * cols, "Mat");
  if (!all_finite(data_)) throw NumericalError("Mat: non-finite entry");
}

Mat Mat::Identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec matvec(const Mat& m, const Vec& x) {
  CheckSameSize(m.cols(), x.size(), "matvec");
  Vec y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vec matvec_transposed(const Mat& m, const Vec& x) {
  CheckSameSize(m.rows(), x.size(), "matvec_transposed");
  Vec y(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const auto row = m.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) y[j] += row[j] * xi;
  }
  return y;
}

void add_outer(const Vec& u, const Vec& v, Mat* m) {
  assert(m != nullptr);
  CheckSameSize(m->rows(), u.size(), "add_outer rows");
  CheckSameSize(m->cols(), v.size(), "add_outer cols");
  auto data = m->span();
  const std::size_t cols = m->cols();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ui = u[i];
    if (ui == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] += ui * v[j];
  }
}

double dot(const Vec& x, const Vec& y) {
  CheckSameSize(x.size(), y.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double norm2(const Vec& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

Vec normalized(const Vec& x) {
  const double n = norm2(x);
  if (n == 0.0) throw DegenerateInputError("normalized: zero-norm vector");
  return (1.0 / n) * x;
}

Vec concat(const Vec& a, const Vec& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return Vec(std::move(out));
}

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::size_t Rng::index(std::size_t n) {
  assert(n > 0);
  const std::uint64_t bound = n;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return static_cast<std::size_t>(r % bound);
  }
}

double Rng::gaussian() {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec Rng::gaussian_vec(std::size_t len) {
  Vec v(len);
  for (std::size_t i = 0; i < len; ++i) v[i] = gaussian();
  return v;
}

Vec Rng::unit_vec(std::size_t len) {
  for (;;) {
    Vec v = gaussian_vec(len);
    if (norm2(v) > 0.0) return normalized(v);
  }
}

}  // namespace embfuse
