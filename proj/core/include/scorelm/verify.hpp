// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scorelm/scores.hpp"
#include "scorelm/simplex.hpp"

namespace scorelm::verify {

// Grid points are integer compositions of n = 1/grid_step into m parts.
inline constexpr std::size_t kMaxGridPoints = 1'000'000;

// Result of maximizing an expected score over the grid for one target.
struct ScanEntry {
  std::vector<double> q;          // data distribution
  std::vector<double> target;     // where the maximum should be (q or q^eps)
  std::vector<double> argmax;     // best grid point
  double argmax_value = 0.0;
  std::vector<std::vector<double>> cell;  // grid points nearest the target
  double target_value = 0.0;      // expected score at the target itself
  double outside_best = 0.0;      // best value outside the cell
  double margin = 0.0;            // target_value - outside_best
  double runner_up_gap = 0.0;     // best in cell - outside_best
  bool argmax_in_cell = false;
  bool pass = false;

  // Mask-enhanced checks (smoothing scans only).
  bool has_mask_checks = false;
  bool dominance_holds = false;       // S_log <= S at every grid point
  double max_dominance_excess = 0.0;  // max(S_log - S) over the grid
  bool equality_at_target = false;    // S_log == S at q^eps
  bool masked_argmax_in_cell = false;
  std::vector<double> masked_argmax;
};

struct ScanReport {
  std::string kind;  // "propriety" or "smoothing"
  ScoreRule rule = ScoreRule::logarithmic();
  SmoothingConfig smoothing;
  std::size_t m = 0;
  double grid_step = 0.0;
  std::size_t grid_points = 0;
  std::vector<ScanEntry> entries;
  bool pass = false;
};

// For each q, maximizes sum_i q_i S(p, i) over the grid. An entry passes when
// the best grid value inside q's cell (the grid points at minimum Euclidean
// distance from q) strictly beats every point outside it.
ScanReport propriety_scan(const ScoreRule& rule, std::size_t m, double grid_step,
                          const std::vector<ProbVector>& q_set);

// As propriety_scan for the smoothed expected score, targeting q^eps. With
// mask_enhanced, additionally checks S_log <= S on the whole grid, equality at
// q^eps, and that the mask-enhanced maximizer also lies in q^eps's cell.
ScanReport smoothing_propriety_scan(const ScoreRule& rule,
                                    const SmoothingConfig& smoothing,
                                    std::size_t m, double grid_step,
                                    const std::vector<ProbVector>& q_set);

// Grid points on the m-simplex at resolution 1/n.
std::vector<std::vector<double>> simplex_grid(std::size_t m, double grid_step);

struct Table1Value {
  std::string rule;
  std::string prediction;  // "q" or "q_eps"
  double value = 0.0;
  double expected = 0.0;   // reference value, -inf for the log/one-hot cell
  bool match = false;
};

struct Table1Report {
  std::vector<Table1Value> values;  // six entries
  bool pass = false;
};

// m = 100, one-hot q, eps = 0.1: S(q, q^eps) and S(q^eps, q^eps) for the
// logarithmic, Brier and spherical scores, matched to 4 decimals.
Table1Report table1_check();

struct GradCheckReport {
  ScoreRule rule = ScoreRule::logarithmic();
  SmoothingConfig smoothing;
  std::size_t m = 0;
  std::size_t trials = 0;
  double h = 0.0;
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates with |analytic| <= 1e-8
  bool finite = true;       // no NaN/inf encountered
};

// Central differences of the token loss, evaluated in long double straight
// from the rule definitions, against loss_gradient_logits at `trials`
// standard-normal logit vectors (scaled by `logit_scale`) with a random
// observed index.
GradCheckReport grad_check(const ScoreRule& rule, const SmoothingConfig& cfg,
                           std::size_t m, std::size_t trials, double h,
                           std::uint64_t seed, double logit_scale = 1.0);

// Same check at one explicit logit vector.
GradCheckReport grad_check_at(const ScoreRule& rule, const SmoothingConfig& cfg,
                              const Logits& z, std::size_t i, double h);

struct EntmaxAlphaReport {
  double alpha = 0.0;
  std::size_t in_support = 0;
  std::size_t out_of_support = 0;
  double max_gap_in_support = 0.0;
  double max_gap_out_of_support = 0.0;  // recorded, never asserted
  bool pass = false;
};

struct EntmaxReport {
  std::size_t m = 0;
  std::vector<EntmaxAlphaReport> alphas;
  bool pass = false;
};

inline constexpr double kEquivalenceTolerance = 1e-8;

// Draws logit vectors (standard normal times `logit_scale`) and uniformly
// random gold labels until `in_support_target` in-support cases have been
// seen for each alpha (or 50x that many draws). Out-of-support draws are
// flagged and excluded from the pass decision.
EntmaxReport entmax_sweep(const std::vector<double>& alphas,
                          std::size_t in_support_target, std::size_t m,
                          std::uint64_t seed, double logit_scale = 1.0);

nlohmann::json to_json(const ScanReport& report);
nlohmann::json to_json(const Table1Report& report);
nlohmann::json to_json(const GradCheckReport& report);
nlohmann::json to_json(const EntmaxReport& report);

}  // namespace scorelm::verify
