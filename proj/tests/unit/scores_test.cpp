// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/scores.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "scorelm/error.hpp"
#include "scorelm/simplex.hpp"
#include "unit/oracles.hpp"

namespace scorelm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<ScoreRule> all_rules() {
  return {ScoreRule::logarithmic(),       ScoreRule::brier(),
          ScoreRule::spherical(),         ScoreRule::alpha_power(1.5),
          ScoreRule::alpha_power(2.5),    ScoreRule::pseudo_spherical(1.5),
          ScoreRule::pseudo_spherical(3), ScoreRule::linear()};
}

ProbVector random_prob(std::mt19937_64& gen, std::size_t m) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> p(m);
  double total = 0.0;
  for (double& v : p) total += v = expo(gen) + 1e-3;
  for (double& v : p) v /= total;
  return ProbVector(std::move(p));
}

// Rule values written out independently of the library.
double ref_score(const ScoreRule& rule, const std::vector<double>& p, std::size_t i) {
  const double a = rule.alpha();
  double sq = 0.0, pa = 0.0;
  for (double v : p) {
    sq += v * v;
    pa += std::pow(v, a);
  }
  switch (rule.kind()) {
    case RuleKind::kLogarithmic: return std::log(p[i]);
    case RuleKind::kBrier: return 2.0 * p[i] - sq;
    case RuleKind::kAlphaPower: return a * std::pow(p[i], a - 1.0) - (a - 1.0) * pa;
    case RuleKind::kSpherical: return p[i] / std::sqrt(sq);
    case RuleKind::kPseudoSpherical: return std::pow(p[i] / std::pow(pa, 1.0 / a), a - 1.0);
    case RuleKind::kLinear: return p[i];
  }
  return 0.0;
}

TEST(ScoreRule, ParseAndNames) {
  EXPECT_EQ(ScoreRule::parse("brier"), ScoreRule::brier());
  EXPECT_EQ(ScoreRule::parse("log"), ScoreRule::logarithmic());
  EXPECT_EQ(ScoreRule::parse("alpha_power", 1.5), ScoreRule::alpha_power(1.5));
  EXPECT_EQ(ScoreRule::parse("pseudo_spherical", 3.0).alpha(), 3.0);
  EXPECT_THROW(ScoreRule::parse("hinge"), Error);
  EXPECT_THROW(ScoreRule::alpha_power(1.0), Error);
  EXPECT_THROW(ScoreRule::pseudo_spherical(0.5), Error);
  EXPECT_EQ(ScoreRule::spherical().name(), "spherical");
}

TEST(Score, MatchesReferenceFormulas) {
  std::mt19937_64 gen(1);
  for (const ScoreRule& rule : all_rules()) {
    for (int t = 0; t < 50; ++t) {
      const ProbVector p = random_prob(gen, 7);
      const std::vector<double> pv(p.begin(), p.end());
      for (std::size_t i = 0; i < 7; ++i) {
        ASSERT_NEAR(score(rule, p, i), ref_score(rule, pv, i), 1e-13) << rule.label();
      }
    }
  }
}

TEST(Score, Examples) {
  const ProbVector u4 = ProbVector::uniform(4);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(score(ScoreRule::brier(), u4, i), 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(score(ScoreRule::spherical(), ProbVector::one_hot(5, 3), 3), 1.0);
  EXPECT_NEAR(score(ScoreRule::pseudo_spherical(3.0), u4, 1), std::pow(4.0, -2.0 / 3.0), 1e-14);
  EXPECT_NEAR(std::pow(4.0, -2.0 / 3.0), 0.39685, 1e-5);
}

TEST(Score, LogOfZeroIsNegativeInfinity) {
  EXPECT_EQ(score(ScoreRule::logarithmic(), ProbVector::one_hot(3, 0), 1), -kInf);
}

TEST(Score, IndexOutOfRange) {
  try {
    score(ScoreRule::brier(), ProbVector::uniform(3), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(Score, SpecialCaseCollapse) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 200; ++t) {
    const ProbVector p = random_prob(gen, 6);
    const std::size_t i = static_cast<std::size_t>(t % 6);
    EXPECT_NEAR(score(ScoreRule::alpha_power(2.0), p, i), score(ScoreRule::brier(), p, i), 1e-12);
    EXPECT_NEAR(score(ScoreRule::pseudo_spherical(2.0), p, i),
                score(ScoreRule::spherical(), p, i), 1e-12);
  }
}

TEST(Score, Bounds) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 300; ++t) {
    const ProbVector p = random_prob(gen, 2 + static_cast<std::size_t>(t % 10));
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double b = score(ScoreRule::brier(), p, i);
      EXPECT_GE(b, -1.0);
      EXPECT_LE(b, 1.0);
      const double s = score(ScoreRule::spherical(), p, i);
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
    }
  }
  EXPECT_EQ(score(ScoreRule::brier(), ProbVector::one_hot(2, 0), 1), -1.0);
  EXPECT_LT(score(ScoreRule::logarithmic(), ProbVector({1.0 - 1e-300, 1e-300}), 1), -690.0);
}

TEST(ExpectedScore, TableValues) {
  const ProbVector e = ProbVector::one_hot(100, 0);
  const ProbVector qe = smooth_distribution(e, 0.1);
  EXPECT_NEAR(expected_score(ScoreRule::brier(), e, qe), 0.8020, 5e-5);
  EXPECT_NEAR(expected_score(ScoreRule::spherical(), qe, qe), 0.9011, 5e-5);
  EXPECT_EQ(expected_score(ScoreRule::logarithmic(), e, qe), -kInf);
}

TEST(ExpectedScore, ZeroTimesInfinityIsZero) {
  const ProbVector p({0.5, 0.5, 0.0});
  const ProbVector q({0.4, 0.6, 0.0});
  const double want = 0.4 * std::log(0.5) + 0.6 * std::log(0.5);
  EXPECT_NEAR(expected_score(ScoreRule::logarithmic(), p, q), want, 1e-15);
}

TEST(ExpectedScore, DimensionMismatch) {
  EXPECT_THROW(expected_score(ScoreRule::brier(), ProbVector::uniform(3), ProbVector::uniform(4)),
               Error);
}

TEST(SmoothedScore, Identities) {
  std::mt19937_64 gen(4);
  const ProbVector p = random_prob(gen, 5);
  for (const ScoreRule& rule : all_rules()) {
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_EQ(smoothed_score(rule, {0.0, false}, p, i), score(rule, p, i));
      EXPECT_NEAR(smoothed_score(rule, {1.0, false}, p, i),
                  smoothed_score(rule, {1.0, false}, p, 0), 1e-14);
    }
  }
}

TEST(SmoothedScore, BrierHandExample) {
  EXPECT_NEAR(smoothed_score(ScoreRule::brier(), {0.5, false}, ProbVector({0.7, 0.3}), 0), 0.62,
              1e-14);
}

TEST(SmoothedScore, ExpectedIdentity) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const ScoreRule& rule : all_rules()) {
    for (int t = 0; t < 100; ++t) {
      const ProbVector p = random_prob(gen, 6);
      const ProbVector q = random_prob(gen, 6);
      const double eps = unit(gen);
      const double lhs = expected_variant_score(rule, {eps, false}, p, q);
      const double rhs = expected_score(rule, p, smooth_distribution(q, eps));
      ASSERT_NEAR(lhs, rhs, 1e-12) << rule.label() << " eps " << eps;
    }
  }
}

TEST(MaskedScore, HandExample) {
  const ProbVector p({0.95, 0.05});
  const double base = smoothed_score(ScoreRule::brier(), {0.2, false}, p, 0);
  const double masked = masked_log_smoothed_score(ScoreRule::brier(), {0.2, true}, p, 0);
  EXPECT_NEAR(masked - base, 0.1 * std::log(0.05), 1e-15);
  EXPECT_NEAR(masked - base, -0.29957, 5e-6);
}

TEST(MaskedScore, EmptyMaskEqualsSmoothed) {
  const ProbVector p({0.3, 0.3, 0.4});
  EXPECT_EQ(masked_log_smoothed_score(ScoreRule::spherical(), {0.3, true}, p, 1),
            smoothed_score(ScoreRule::spherical(), {0.3, false}, p, 1));
}

TEST(MaskedScore, ZeroEntryBelowThreshold) {
  EXPECT_EQ(masked_log_smoothed_score(ScoreRule::brier(), {0.1, true}, ProbVector({1.0, 0.0}), 0),
            -kInf);
}

TEST(MaskedScore, RequiresPositiveEps) {
  try {
    masked_log_smoothed_score(ScoreRule::brier(), {0.0, true}, ProbVector::uniform(2), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfiguration);
  }
}

TEST(MaskedScore, Dominance) {
  std::mt19937_64 gen(6);
  for (const ScoreRule& rule : {ScoreRule::brier(), ScoreRule::spherical()}) {
    for (int t = 0; t < 200; ++t) {
      const ProbVector p = random_prob(gen, 8);
      const ProbVector q = random_prob(gen, 8);
      const double plain = expected_variant_score(rule, {0.2, false}, p, q);
      const double masked = expected_variant_score(rule, {0.2, true}, p, q);
      EXPECT_LE(masked, plain);
      bool any_below = false;
      for (double v : p) any_below = any_below || v < 0.2 / 8.0;
      if (!any_below) EXPECT_EQ(masked, plain);
    }
  }
}

TEST(Variants, ArgmaxMatchesMode) {
  std::mt19937_64 gen(7);
  for (const ScoreRule& rule : all_rules()) {
    for (const SmoothingConfig cfg : {SmoothingConfig{0.0, false}, SmoothingConfig{0.2, false},
                                      SmoothingConfig{0.2, true}}) {
      for (int t = 0; t < 50; ++t) {
        const ProbVector p = random_prob(gen, 6);
        std::size_t mode = 0, best = 0;
        for (std::size_t k = 0; k < 6; ++k) {
          if (p[k] > p[mode]) mode = k;
          if (variant_score(rule, cfg, p, k) > variant_score(rule, cfg, p, best)) best = k;
        }
        ASSERT_EQ(best, mode) << rule.label();
      }
    }
  }
}

TEST(SmoothingConfig, Validation) {
  EXPECT_THROW((SmoothingConfig{-0.1, false}.validate()), Error);
  EXPECT_THROW((SmoothingConfig{1.1, false}.validate()), Error);
  EXPECT_THROW((SmoothingConfig{0.0, true}.validate()), Error);
  EXPECT_NO_THROW((SmoothingConfig{1.0, true}.validate()));
}

TEST(Gradient, LogClosedForm) {
  const auto g = loss_gradient_logits(ScoreRule::logarithmic(), {}, Logits({0, 0, 0, 0}), 2);
  const std::vector<double> want = {0.25, 0.25, -0.75, 0.25};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(g[k], want[k], 1e-15);

  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> z(9);
    for (double& v : z) v = 2.0 * normal(gen);
    const auto p = testing::ref_softmax(z);
    const auto grad = loss_gradient_logits(ScoreRule::logarithmic(), {}, Logits(z), 4);
    for (std::size_t k = 0; k < 9; ++k) {
      ASSERT_NEAR(grad[k], p[k] - (k == 4 ? 1.0 : 0.0), 1e-15);
    }
  }
}

TEST(Gradient, BrierStationaryAtOptimum) {
  const auto g = loss_gradient_logits(ScoreRule::brier(), {}, Logits({40.0, 0.0, 0.0}), 0);
  for (double v : g) EXPECT_NEAR(v, 0.0, 1e-15);
}

// Independent finite-difference oracle over a reference loss built from
// ref_score and ref_softmax.
TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> normal;
  for (const ScoreRule& rule : all_rules()) {
    for (const SmoothingConfig cfg : {SmoothingConfig{0.0, false}, SmoothingConfig{0.1, false},
                                      SmoothingConfig{0.3, true}}) {
      for (int t = 0; t < 20; ++t) {
        const std::size_t m = 8;
        std::vector<double> z(m);
        for (double& v : z) v = 1.5 * normal(gen);
        const std::size_t i = static_cast<std::size_t>(t) % m;
        const auto p0 = testing::ref_softmax(z);
        auto loss = [&](const std::vector<double>& x) {
          const auto p = testing::ref_softmax(x);
          double u = (1.0 - cfg.eps) * ref_score(rule, p, i);
          for (std::size_t j = 0; j < m; ++j) {
            u += cfg.eps / m * ref_score(rule, p, j);
            // Mask membership frozen at the unperturbed point.
            if (cfg.mask_enhanced && p0[j] < cfg.eps / m) u += cfg.eps / m * std::log(p[j]);
          }
          return -u;
        };
        const auto numeric = testing::central_diff(loss, z, 1e-5);
        const auto analytic = loss_gradient_logits(rule, cfg, Logits(z), i);
        for (std::size_t k = 0; k < m; ++k) {
          ASSERT_NEAR(analytic[k], numeric[k], 1e-7 + 1e-5 * std::abs(numeric[k]))
              << rule.label() << " eps " << cfg.eps << " k " << k;
        }
      }
    }
  }
}

TEST(Gradient, SaturatedLogitsStayFinite) {
  for (const ScoreRule& rule : all_rules()) {
    const auto g = loss_gradient_logits(rule, {0.1, true}, Logits({800.0, 0.0, -800.0}), 2);
    for (double v : g) EXPECT_TRUE(std::isfinite(v)) << rule.label();
  }
}

TEST(TokenLoss, ClampsLogAtFloor) {
  const std::vector<double> p = {1.0, 0.0};
  EXPECT_NEAR(token_loss(ScoreRule::logarithmic(), {}, p, 1), -std::log(kTrainingLogFloor), 1e-9);
}

TEST(EntmaxEquivalence, InSupportGapIsTiny) {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> normal;
  int checked = 0;
  while (checked < 50) {
    std::vector<double> z(10);
    for (double& v : z) v = normal(gen);
    const auto r = entmax_power_equivalence_gap(Logits(z), 3, 2.0);
    if (!r.gold_in_support) continue;
    ++checked;
    EXPECT_LT(r.gap, 1e-8);
  }
}

TEST(EntmaxEquivalence, UniformFullSupport) {
  const auto r = entmax_power_equivalence_gap(Logits({0.2, 0.2, 0.2}), 1, 1.5);
  EXPECT_TRUE(r.gold_in_support);
  EXPECT_LT(r.gap, 1e-8);
}

TEST(EntmaxEquivalence, OutOfSupportFlagged) {
  const auto r = entmax_power_equivalence_gap(Logits({10.0, 0.0}), 1, 2.0);
  EXPECT_FALSE(r.gold_in_support);
  // Both forms evaluated directly: entmax loss (p-e_x).z + 0 = 10, power form (1+1)/2 = 1.
  EXPECT_NEAR(r.entmax_loss, 10.0, 1e-12);
  EXPECT_NEAR(r.gap, 9.0, 1e-12);
}

}  // namespace
}  // namespace scorelm
