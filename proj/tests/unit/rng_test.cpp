// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/rng.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

namespace scorelm {
namespace {

// Reference outputs from an independent arbitrary-precision implementation.
TEST(SplitMix64, KnownOutputs) {
  const std::vector<std::uint64_t> seed0 = {0xe220a8397b1dcdafULL, 0x6e789e6aa1b965f4ULL,
                                            0x06c45d188009454fULL, 0xf88bb8a8724c81ecULL,
                                            0x1b39896a51a8749bULL};
  SplitMix64 a(0);
  for (std::uint64_t want : seed0) EXPECT_EQ(a.next(), want);

  const std::vector<std::uint64_t> seed1234567 = {0x599ed017fb08fc85ULL, 0x2c73f08458540fa5ULL,
                                                  0x883ebce5a3f27c77ULL, 0x3fbef740e9177b3fULL,
                                                  0xe3b8346708cb5ecdULL};
  SplitMix64 b(1234567);
  for (std::uint64_t want : seed1234567) EXPECT_EQ(b.next(), want);
}

TEST(SplitMix64, UniformRange) {
  SplitMix64 rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.uniform(-2.0, 3.0);
    ASSERT_GE(v, -2.0);
    ASSERT_LT(v, 3.0);
  }
}

TEST(SplitMix64, BelowCoversRange) {
  SplitMix64 rng(4);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[rng.below(7)];
  for (int h : hits) EXPECT_GT(h, 850);
}

TEST(SplitMix64, NormalMoments) {
  SplitMix64 rng(5);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(DeriveSeed, StreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

}  // namespace
}  // namespace scorelm
