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

#include <cmath>

#include "embfuse/errors.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "test_util.h"

namespace embfuse {
namespace {

using testing::ToStd;

TEST(CosineDistanceTest, BasicAngles) {
  const Vec x{0.3, -1.2, 2.0};
  EXPECT_NEAR(cosine_distance(x, x), 0.0, 1e-15);
  EXPECT_NEAR(cosine_distance(x, -1.0 * x), 2.0, 1e-15);
  EXPECT_EQ(cosine_distance(Vec{1, 0}, Vec{0, 1}), 1.0);
}

TEST(CosineDistanceTest, ZeroNormIsAnError) {
  EXPECT_THROW(cosine_distance(Vec(3), Vec{1, 2, 3}), DegenerateInputError);
  EXPECT_THROW(cosine_distance(Vec{1, 2, 3}, Vec(3)), DegenerateInputError);
  EXPECT_THROW(cosine_distance(Vec{1, 2}, Vec{1, 2, 3}), DimensionError);
}

TEST(CosineDistanceTest, ScaleInvariantAndBounded) {
  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + rng.index(64);
    const Vec x = rng.gaussian_vec(n);
    const Vec y = rng.gaussian_vec(n);
    const double c = std::exp(rng.uniform(-5.0, 5.0));
    const double d = cosine_distance(x, y);
    EXPECT_NEAR(cosine_distance(c * x, y), d, 1e-12);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0);
  }
}

TEST(TripletLossTest, InactiveHinge) {
  // d(a,p) = 0.3 and d(a,n) = 0.7 on unit vectors in the plane.
  const double cp = 0.7, cn = 0.3;
  const Vec a{1, 0};
  const Vec p{cp, std::sqrt(1 - cp * cp)};
  const Vec n{cn, -std::sqrt(1 - cn * cn)};
  EXPECT_EQ(triplet_loss(a, p, n, {0.25}), 0.0);
  const TripletGrad g = triplet_loss_grad(a, p, n, {0.25});
  EXPECT_EQ(g.anchor, Vec(2));
  EXPECT_EQ(g.positive, Vec(2));
  EXPECT_EQ(g.negative, Vec(2));
}

TEST(TripletLossTest, PositiveEqualsAnchor) {
  const double cn = 0.9;  // d(a,n) = 0.1
  const Vec a{1, 0};
  const Vec n{cn, std::sqrt(1 - cn * cn)};
  EXPECT_NEAR(triplet_loss(a, a, n, {0.25}), 0.15, 1e-15);
}

TEST(TripletLossTest, MatchesStraightLineOracle) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng.index(30);
    const Vec a = rng.unit_vec(n), p = rng.unit_vec(n), neg = rng.unit_vec(n);
    EXPECT_NEAR(triplet_loss(a, p, neg, {0.25}),
                oracle::TripletLoss(ToStd(a), ToStd(p), ToStd(neg), 0.25), 1e-14);
  }
}

TEST(TripletLossTest, ZeroExactlyWhenMarginSatisfied) {
  Rng rng(10);
  for (int i = 0; i < 5000; ++i) {
    const std::size_t n = 2 + rng.index(8);
    const Vec a = rng.gaussian_vec(n), p = rng.gaussian_vec(n), neg = rng.gaussian_vec(n);
    const double loss = triplet_loss(a, p, neg, {0.25});
    const bool satisfied = cosine_distance(a, p) + 0.25 <= cosine_distance(a, neg);
    EXPECT_GE(loss, 0.0);
    EXPECT_EQ(loss == 0.0, satisfied);
  }
}

TEST(TripletLossTest, HingeBoundaryTakesZeroSubgradient) {
  // a = p gives d(a,p) = 0; with d(a,n) = 1 the slack is 0 at alpha = 1.
  const Vec a{1, 0}, n{0, 1};
  const TripletGrad g = triplet_loss_grad(a, a, n, {1.0});
  EXPECT_EQ(g.loss, 0.0);
  EXPECT_EQ(g.anchor, Vec(2));
  EXPECT_EQ(g.positive, Vec(2));
  EXPECT_EQ(g.negative, Vec(2));
}

TEST(TripletLossCfgTest, MarginRange) {
  EXPECT_THROW(TripletLossCfg{0.0}.Validate(), ConfigError);
  EXPECT_THROW(TripletLossCfg{2.5}.Validate(), ConfigError);
  EXPECT_NO_THROW(TripletLossCfg{2.0}.Validate());
  EXPECT_NO_THROW(TripletLossCfg{0.25}.Validate());
}

TEST(CosineGradTest, OrthogonalToInput) {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 2 + rng.index(64);
    const Vec x = rng.gaussian_vec(n), y = rng.gaussian_vec(n);
    EXPECT_NEAR(dot(cosine_distance_grad_x(x, y), x), 0.0, 1e-10);
  }
}

TEST(CosineGradTest, PositiveGradientIsOrthogonalComponentOfAnchor) {
  // For an active hinge dL/dp = d d(a,p)/dp = -(a_perp) / (||a|| ||p||), where
  // a_perp is the part of a orthogonal to p.
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 3 + rng.index(10);
    const Vec a = rng.gaussian_vec(n), p = rng.gaussian_vec(n), neg = rng.gaussian_vec(n);
    const TripletGrad g = triplet_loss_grad(a, p, neg, {2.0});
    ASSERT_GT(g.loss, 0.0);
    const Vec a_perp = a - (dot(a, p) / dot(p, p)) * p;
    const Vec expected = (-1.0 / (norm2(a) * norm2(p))) * a_perp;
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(g.positive[k], expected[k], 1e-12);
  }
}

TEST(TripletGradTest, MatchesFiniteDifferences) {
  Rng rng(99);
  const double h = 1e-6;
  int checked = 0;
  for (const std::size_t n : {4u, 8u, 64u}) {
    int done = 0;
    while (done < 100) {
      const Vec a = rng.gaussian_vec(n), p = rng.gaussian_vec(n), neg = rng.gaussian_vec(n);
      const double alpha = 0.25;
      const double slack = cosine_distance(a, p) - cosine_distance(a, neg) + alpha;
      if (slack < 1e-3) continue;  // keep clear of the hinge
      const TripletGrad g = triplet_loss_grad(a, p, neg, {alpha});
      const auto A = ToStd(a), P = ToStd(p), N = ToStd(neg);
      const auto ga = oracle::CentralDifferences(
          [&](const oracle::Vector& t) { return oracle::TripletLoss(t, P, N, alpha); }, A, h);
      const auto gp = oracle::CentralDifferences(
          [&](const oracle::Vector& t) { return oracle::TripletLoss(A, t, N, alpha); }, P, h);
      const auto gn = oracle::CentralDifferences(
          [&](const oracle::Vector& t) { return oracle::TripletLoss(A, P, t, alpha); }, N, h);
      EXPECT_LT(oracle::VectorRelativeError(ToStd(g.anchor), ga), 1e-4);
      EXPECT_LT(oracle::VectorRelativeError(ToStd(g.positive), gp), 1e-4);
      EXPECT_LT(oracle::VectorRelativeError(ToStd(g.negative), gn), 1e-4);
      ++done;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 300);
}

}  // namespace
}  // namespace embfuse
