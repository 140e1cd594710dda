// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "svtk/align.hpp"
#include "svtk/error.hpp"
#include "svtk/testkit.hpp"

using namespace svtk;
using Path = std::vector<std::pair<std::size_t, std::size_t>>;

namespace {

FeatureSequence column(std::initializer_list<double> v) {
  return FeatureSequence(Matrix(v.size(), 1, std::vector<double>(v)));
}

}  // namespace

TEST(Dtw, SelfAlignmentIsDiagonal) {
  std::mt19937_64 rng(1);
  const FeatureSequence a(test::random_matrix(rng, 9, 3));
  const auto r = dtw(a, a);
  EXPECT_EQ(r.cost, 0.0);
  ASSERT_EQ(r.path.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(r.path[i], std::make_pair(i, i));
}

TEST(Dtw, HandExample) {
  const auto r = dtw(column({0, 1}), column({0, 0, 1}));
  EXPECT_EQ(r.cost, 0.0);
  EXPECT_EQ(r.path, (Path{{0, 0}, {0, 1}, {1, 2}}));
  EXPECT_EQ(r.normalized_cost, 0.0);
}

TEST(Dtw, TieBreakPrefersDiagonalThenSrcStep) {
  // every frame distance is zero, so only the tie order picks the path
  const auto r = dtw(column({1, 1, 1}), column({1, 1, 1, 1}));
  EXPECT_EQ(r.path, (Path{{0, 0}, {0, 1}, {1, 2}, {2, 3}}));
  const auto s = dtw(column({1, 1, 1, 1}), column({1, 1, 1}));
  EXPECT_EQ(s.path, (Path{{0, 0}, {1, 0}, {2, 1}, {3, 2}}));
}

TEST(Dtw, MatchesBruteForce) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> len(1, 8);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t d = 1 + trial % 3;
    const FeatureSequence a(test::random_matrix(rng, len(rng), d));
    const FeatureSequence b(test::random_matrix(rng, len(rng), d));
    for (auto metric : {DtwMetric::euclidean, DtwMetric::cosine_distance}) {
      const auto fast = dtw(a, b, {metric, std::nullopt});
      const auto slow = testkit::brute_force_dtw(a, b, metric);
      EXPECT_EQ(fast.cost, slow.cost) << trial;
      // cosine distances of 1-d frames are only 0 or 2, so optimal paths tie
      if (metric == DtwMetric::euclidean) EXPECT_EQ(fast.path, slow.path) << trial;
      double along = 0.0;
      for (const auto& [i, j] : fast.path) along += frame_distance(a.frame(i), b.frame(j), metric);
      EXPECT_NEAR(along, fast.cost, 1e-12);
      EXPECT_TRUE(is_valid_warp_path(fast.path, a.frames(), b.frames()));
      EXPECT_DOUBLE_EQ(fast.normalized_cost, fast.cost / static_cast<double>(fast.path.size()));
    }
  }
}

TEST(Dtw, CostIsSymmetric) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const FeatureSequence a(test::random_matrix(rng, 3 + trial % 11, 4));
    const FeatureSequence b(test::random_matrix(rng, 2 + trial % 7, 4));
    EXPECT_NEAR(dtw(a, b).cost, dtw(b, a).cost, 1e-12);
  }
}

TEST(Dtw, BandConstrainsPath) {
  std::mt19937_64 rng(5);
  const FeatureSequence a(test::random_matrix(rng, 30, 2));
  const FeatureSequence b(test::random_matrix(rng, 30, 2));
  const auto free = dtw(a, b);
  const auto banded = dtw(a, b, {DtwMetric::euclidean, std::size_t{2}});
  EXPECT_GE(banded.cost, free.cost);
  for (const auto& [i, j] : banded.path) {
    EXPECT_LE(i > j ? i - j : j - i, 2u);
  }
  EXPECT_TRUE(is_valid_warp_path(banded.path, 30, 30));
  // The band follows the slanted diagonal, so unequal lengths still connect
  // unless the band is narrower than one step of the slope.
  const FeatureSequence c(test::random_matrix(rng, 10, 2));
  EXPECT_NO_THROW(dtw(a, c, {DtwMetric::euclidean, std::size_t{3}}));
  EXPECT_THROW(dtw(c, a, {DtwMetric::euclidean, std::size_t{0}}), DomainError);
}

TEST(Dtw, Errors) {
  EXPECT_THROW(dtw(column({1}), FeatureSequence(Matrix(2, 2))), DomainError);
  EXPECT_THROW(dtw(column({1}), FeatureSequence(Matrix(0, 1))), DomainError);
  EXPECT_THROW(FeatureSequence(Matrix(1, 1, std::vector<double>{std::nan("")})), DomainError);
  EXPECT_THROW(FeatureSequence(Matrix(3, 0)), DomainError);
}

TEST(WarpPath, Validity) {
  EXPECT_TRUE(is_valid_warp_path(Path{{0, 0}, {1, 1}}, 2, 2));
  EXPECT_FALSE(is_valid_warp_path(Path{{0, 0}, {1, 1}}, 2, 3));
  EXPECT_FALSE(is_valid_warp_path(Path{{0, 1}, {1, 2}}, 2, 3));
  EXPECT_FALSE(is_valid_warp_path(Path{{0, 0}, {2, 2}}, 3, 3));
  EXPECT_FALSE(is_valid_warp_path(Path{{0, 0}, {1, 0}, {0, 1}, {1, 1}}, 2, 2));
  EXPECT_FALSE(is_valid_warp_path(Path{}, 1, 1));
}

TEST(Warp, HandExample) {
  const auto src = column({2, 4, 6});
  DtwResult r;
  r.path = {{0, 0}, {0, 1}, {1, 2}};
  const auto w = warp_to_reference(src, r, 2);
  EXPECT_EQ(w.data(), Matrix(2, 1, {3.0, 6.0}));
  const auto first = warp_to_reference(src, r, 2, WarpReduce::first);
  EXPECT_EQ(first.data(), Matrix(2, 1, {2.0, 6.0}));
  EXPECT_THROW(warp_to_reference(src, r, 3), DomainError);
}

TEST(Warp, IdentityAndSingleSource) {
  std::mt19937_64 rng(3);
  const FeatureSequence a(test::random_matrix(rng, 6, 3));
  EXPECT_EQ(warp_to_reference(a, dtw(a, a), 6).data(), a.data());

  const FeatureSequence one(Matrix(1, 2, {0.5, -1.0}));
  const FeatureSequence ref(test::random_matrix(rng, 3, 2));
  const auto w = warp_to_reference(one, dtw(ref, one), 3);
  ASSERT_EQ(w.frames(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(w.frame(i)[0], 0.5);
    EXPECT_EQ(w.frame(i)[1], -1.0);
  }
}

TEST(Warp, LengthAlwaysMatchesReference) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const FeatureSequence a(test::random_matrix(rng, 1 + trial % 13, 2));
    const FeatureSequence b(test::random_matrix(rng, 1 + (trial * 7) % 17, 2));
    EXPECT_EQ(warp_to_reference(b, dtw(a, b), a.frames()).frames(), a.frames());
  }
}

TEST(ContentLoss, Examples) {
  std::mt19937_64 rng(4);
  const FeatureSequence a(test::random_matrix(rng, 12, 5));
  EXPECT_EQ(content_loss(a, a), 0.0);
  EXPECT_EQ(content_loss(column({0, 1}), column({0, 0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(content_loss(column({0, 2}), column({1, 1})), 1.0);
}

TEST(NearestInterpolate, Examples) {
  const auto c = test::voiced_contour({100, 200});
  const auto up = nearest_interpolate(c, 4);
  ASSERT_EQ(up.size(), 4u);
  EXPECT_EQ(up[0].f0_hz, 100.0);
  EXPECT_EQ(up[1].f0_hz, 100.0);
  EXPECT_EQ(up[2].f0_hz, 200.0);
  EXPECT_EQ(up[3].f0_hz, 200.0);
  EXPECT_DOUBLE_EQ(up.hop_s(), 0.005);

  EXPECT_EQ(nearest_interpolate(c, 2), c);

  const auto five = test::voiced_contour({100, 0, 300, 0, 500});
  const auto mid = nearest_interpolate(five, 1);
  ASSERT_EQ(mid.size(), 1u);
  EXPECT_EQ(mid[0].f0_hz, 300.0);

  const auto down = nearest_interpolate(five, 3);
  EXPECT_EQ(down[0].f0_hz, 100.0);
  EXPECT_EQ(down[1].f0_hz, 300.0);
  EXPECT_EQ(down[2].f0_hz, 500.0);

  EXPECT_THROW(nearest_interpolate(F0Contour{}, 3), DomainError);
  EXPECT_THROW(nearest_interpolate(c, 0), DomainError);
}

TEST(NearestInterpolate, SelectsExistingFrames) {
  const auto c = test::voiced_contour({110, 0, 130, 140, 0, 160, 170});
  for (std::size_t len = 1; len < 30; ++len) {
    const auto out = nearest_interpolate(c, len);
    ASSERT_EQ(out.size(), len);
    for (const auto& f : out.frames()) {
      EXPECT_NE(std::find(c.frames().begin(), c.frames().end(), f), c.frames().end());
    }
  }
}
