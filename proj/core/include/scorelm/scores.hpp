// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorelm/simplex.hpp"

namespace scorelm {

enum class RuleKind {
  kLogarithmic,
  kBrier,
  kSpherical,
  kAlphaPower,
  kPseudoSpherical,
  kLinear,  // S(p, i) = p_i. Improper; kept as a negative control.
};

// A scoring rule S(p, i). `alpha` is only meaningful for the alpha-power and
// pseudo-spherical families, where it must exceed 1; it is pinned to 2 for
// the other kinds so that equality comparisons behave.
class ScoreRule {
 public:
  static ScoreRule logarithmic() { return ScoreRule(RuleKind::kLogarithmic, 2.0); }
  static ScoreRule brier() { return ScoreRule(RuleKind::kBrier, 2.0); }
  static ScoreRule spherical() { return ScoreRule(RuleKind::kSpherical, 2.0); }
  static ScoreRule linear() { return ScoreRule(RuleKind::kLinear, 2.0); }
  static ScoreRule alpha_power(double alpha);
  static ScoreRule pseudo_spherical(double alpha);

  // Accepts the names produced by name(); `alpha` is ignored by the
  // parameter-free kinds.
  static ScoreRule parse(std::string_view name, double alpha = 2.0);

  RuleKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  bool has_alpha() const noexcept {
    return kind_ == RuleKind::kAlphaPower || kind_ == RuleKind::kPseudoSpherical;
  }

  // "logarithmic", "brier", "spherical", "alpha_power", "pseudo_spherical",
  // "linear".
  std::string_view name() const noexcept;
  // name() plus the alpha value for the parametric families.
  std::string label() const;

  friend bool operator==(const ScoreRule&, const ScoreRule&) = default;

 private:
  ScoreRule(RuleKind kind, double alpha) : kind_(kind), alpha_(alpha) {}

  RuleKind kind_;
  double alpha_;
};

struct SmoothingConfig {
  double eps = 0.0;
  bool mask_enhanced = false;

  // eps must lie in [0, 1]; mask enhancement needs eps > 0 because the
  // under-smoothing threshold eps/m would otherwise be zero.
  void validate() const;

  friend bool operator==(const SmoothingConfig&, const SmoothingConfig&) = default;
};

// Lower clamp applied to log arguments on the training path only.
inline constexpr double kTrainingLogFloor = 1e-12;

// S(p, i). The logarithmic score returns -infinity when p_i == 0.
double score(const ScoreRule& rule, const ProbVector& p, std::size_t i);

// sum_i q_i S(p, i), with q_i * (-inf) taken as 0 when q_i == 0.
double expected_score(const ScoreRule& rule, const ProbVector& p,
                      const ProbVector& q);

// (1 - eps) S(p, i) + (eps / m) sum_j S(p, j). The mask flag in `cfg` is
// not consulted; see masked_log_smoothed_score.
double smoothed_score(const ScoreRule& rule, const SmoothingConfig& cfg,
                      const ProbVector& p, std::size_t i);

// smoothed_score plus (eps / m) sum_j 1{p_j < eps/m} log p_j.
double masked_log_smoothed_score(const ScoreRule& rule,
                                 const SmoothingConfig& cfg,
                                 const ProbVector& p, std::size_t i);

// Dispatches on the config: plain score when eps == 0 and no mask,
// smoothed_score, or masked_log_smoothed_score.
double variant_score(const ScoreRule& rule, const SmoothingConfig& cfg,
                     const ProbVector& p, std::size_t i);

// sum_i q_i variant_score(rule, cfg, p, i).
double expected_variant_score(const ScoreRule& rule, const SmoothingConfig& cfg,
                              const ProbVector& p, const ProbVector& q);

// Per-token training loss -S_variant(p, i) evaluated with log arguments
// clamped at kTrainingLogFloor, together with its gradient with respect to
// the logits that produced `p` through softmax. `grad_logits` must have the
// size of `p`. Mask membership is fixed by the forward values.
double token_loss_and_gradient(const ScoreRule& rule,
                               const SmoothingConfig& cfg,
                               std::span<const double> p, std::size_t i,
                               std::span<double> grad_logits);

// Loss only; same clamping as token_loss_and_gradient.
double token_loss(const ScoreRule& rule, const SmoothingConfig& cfg,
                  std::span<const double> p, std::size_t i);

// d(-S_variant(softmax(z), i)) / dz.
std::vector<double> loss_gradient_logits(const ScoreRule& rule,
                                         const SmoothingConfig& cfg,
                                         const Logits& z, std::size_t i);

struct EquivalenceGap {
  double gap = 0.0;
  bool gold_in_support = false;
  double entmax_loss = 0.0;
  double power_loss = 0.0;
};

// Compares the alpha-entmax loss (p - e_x).z + H_alpha(p) against the affine
// image (L_power + 1) / (alpha (alpha - 1)) of the alpha-power token loss.
EquivalenceGap entmax_power_equivalence_gap(const Logits& z, std::size_t x,
                                            double alpha);

}  // namespace scorelm
