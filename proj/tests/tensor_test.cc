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

#include <cmath>
#include <cstdint>

#include "embfuse/errors.h"
#include "gtest/gtest.h"

namespace embfuse {
namespace {

TEST(MatvecTest, IdentityReturnsInput) {
  const Vec x{1, 2, 3};
  EXPECT_EQ(matvec(Mat::Identity(3), x), x);
}

TEST(MatvecTest, ZeroMatrix) {
  EXPECT_EQ(matvec(Mat(2, 3), Vec{4, -5, 6}), (Vec{0, 0}));
}

TEST(MatvecTest, HandComputed) {
  const Mat m(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(matvec(m, Vec{1, 1}), (Vec{3, 7}));
}

TEST(MatvecTest, DimensionMismatchThrows) {
  EXPECT_THROW(matvec(Mat(2, 3), Vec{1, 2}), DimensionError);
  EXPECT_THROW(matvec_transposed(Mat(2, 3), Vec{1, 2, 3}), DimensionError);
}

TEST(MatvecTest, TransposedMatchesExplicitTranspose) {
  Rng rng(5);
  Mat m(3, 4);
  for (double& v : m.span()) v = rng.gaussian();
  Mat t(4, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) t(j, i) = m(i, j);
  const Vec x = rng.gaussian_vec(3);
  const Vec a = matvec_transposed(m, x);
  const Vec b = matvec(t, x);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(MatvecTest, DistributesOverAddition) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.index(8);
    const std::size_t cols = 1 + rng.index(8);
    Mat m(rows, cols);
    for (double& v : m.span()) v = rng.gaussian();
    const Vec x = rng.gaussian_vec(cols);
    const Vec y = rng.gaussian_vec(cols);
    const Vec lhs = matvec(m, x + y);
    const Vec rhs = matvec(m, x) + matvec(m, y);
    for (std::size_t i = 0; i < rows; ++i) {
      const double scale = std::max({std::abs(lhs[i]), std::abs(rhs[i]), 1.0});
      EXPECT_LE(std::abs(lhs[i] - rhs[i]) / scale, 1e-12);
    }
  }
}

TEST(DotTest, Cases) {
  EXPECT_EQ(dot(Vec{1, 0}, Vec{0, 1}), 0.0);
  EXPECT_EQ(dot(Vec{1, 2, 3}, Vec{4, 5, 6}), 32.0);
  const Vec x{0.5, -2, 3};
  EXPECT_DOUBLE_EQ(dot(x, x), norm2(x) * norm2(x));
  EXPECT_THROW(dot(Vec{1}, Vec{1, 2}), DimensionError);
}

TEST(DotTest, SymmetricExactly) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + rng.index(32);
    const Vec x = rng.gaussian_vec(n);
    const Vec y = rng.gaussian_vec(n);
    EXPECT_EQ(dot(x, y), dot(y, x));
  }
}

TEST(Norm2Test, Cases) {
  EXPECT_EQ(norm2(Vec{3, 4}), 5.0);
  EXPECT_EQ(norm2(Vec(5)), 0.0);
  EXPECT_EQ(norm2(Vec{1, 1, 1, 1}), 2.0);
}

TEST(NormalizedTest, ZeroVectorIsAnError) {
  EXPECT_THROW(normalized(Vec(3)), DegenerateInputError);
  EXPECT_NEAR(norm2(normalized(Vec{2, -7, 1})), 1.0, 1e-15);
}

TEST(VecTest, RejectsNonFinite) {
  EXPECT_THROW(Vec({1.0, std::nan("")}), NumericalError);
  EXPECT_THROW(Vec(std::vector<double>{INFINITY}), NumericalError);
  EXPECT_THROW(Mat(1, 2, std::vector<double>{1.0}), DimensionError);
}

TEST(AddOuterTest, Accumulates) {
  Mat m(2, 3);
  add_outer(Vec{1, 2}, Vec{1, 0, -1}, &m);
  add_outer(Vec{1, 2}, Vec{1, 0, -1}, &m);
  EXPECT_EQ(m, Mat(2, 3, {2, 0, -2, 4, 0, -4}));
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(123456789);
  Rng b(123456789);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngTest, KnownSplitmix64Values) {
  // Reference outputs of splitmix64 seeded with 0.
  Rng rng(0);
  EXPECT_EQ(rng.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next_u64(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.next_u64(), 0x06c45d188009454fULL);
}

TEST(RngTest, DerivedDrawsInRange) {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.index(7), 7u);
    ASSERT_TRUE(std::isfinite(rng.gaussian()));
  }
}

TEST(RngTest, GaussianMoments) {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  // 5 sigma bounds for mean and variance of N(0, 1).
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

}  // namespace
}  // namespace embfuse
