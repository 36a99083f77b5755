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

#ifndef EMBFUSE_TENSOR_H_
#define EMBFUSE_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace embfuse {

// Dense vector of doubles. Embeddings, biases and activations all live here.
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t len, double fill = 0.0);
  Vec(std::initializer_list<double> values);
  // Throws NumericalError if any entry is NaN or infinite.
  explicit Vec(std::vector<double> values);

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::span<const double> span() const { return data_; }
  std::span<double> span() { return data_; }
  const std::vector<double>& values() const { return data_; }

  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }

  Vec& operator+=(const Vec& other);
  Vec& operator-=(const Vec& other);
  Vec& operator*=(double scale);

  bool operator==(const Vec& other) const = default;

 private:
  std::vector<double> data_;
};

Vec operator+(Vec lhs, const Vec& rhs);
Vec operator-(Vec lhs, const Vec& rhs);
Vec operator*(double scale, Vec v);

// Row-major dense matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Throws DimensionError unless values.size() == rows * cols.
  Mat(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Mat Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> span() const { return data_; }
  std::span<double> span() { return data_; }

  bool operator==(const Mat& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = m * x. Throws DimensionError if m.cols() != x.size().
Vec matvec(const Mat& m, const Vec& x);

// y = m^T * x. Throws DimensionError if m.rows() != x.size().
Vec matvec_transposed(const Mat& m, const Vec& x);

// m += u * v^T.
void add_outer(const Vec& u, const Vec& v, Mat* m);

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);

// x / ||x||; throws DegenerateInputError for the zero vector.
Vec normalized(const Vec& x);

// (a || b).
Vec concat(const Vec& a, const Vec& b);

bool all_finite(std::span<const double> values);

// splitmix64 generator. The integer stream is fully specified by the seed:
//   state += 0x9E3779B97F4A7C15
//   z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   out = z ^ (z >> 31)
// Derived draws are built from that stream only:
//   uniform01  = (out >> 11) * 2^-53, in [0, 1)
//   index(n)   = out % n after rejecting out < (2^64 - n) % n
//   gaussian   = Box-Muller cosine branch, one pair of draws per sample
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform01();
  double uniform(double lo, double hi);
  std::size_t index(std::size_t n);
  double gaussian();

  Vec gaussian_vec(std::size_t len);
  // Uniform direction on the unit sphere.
  Vec unit_vec(std::size_t len);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace embfuse

#endif  // EMBFUSE_TENSOR_H_
