// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scorelm/model.hpp"
#include "scorelm/scores.hpp"

namespace scorelm {

// Sign-normalized per-token objective, always <= 0:
//   logarithmic  log p_i
//   brier        2 p_i - sum_j p_j^2 - 1
//   spherical    p_i / |p| - 1
// Other rules raise kConfiguration.
double normalized_objective(const ScoreRule& rule, const ProbVector& p,
                            std::size_t i);

struct BeamConfig {
  int beam_size = 4;
  int max_len = 32;
  double length_penalty = 0.0;
  ScoreRule objective = ScoreRule::logarithmic();

  void validate() const;
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // generated ids only, EOS included if emitted
  double raw_score = 0.0;       // sum of normalized per-step objectives
  bool finished = false;

  // raw_score / |tokens|^length_penalty.
  double normalized_score(double length_penalty) const;
};

// Repeatedly appends the most probable token (lowest id on ties) until EOS or
// max_len. raw_score accumulates the logarithmic objective.
Hypothesis greedy(const LanguageModel& model, std::span<const TokenId> prompt,
                  int max_len);

// Same-length pruning on raw_score: each step keeps the best beam_size
// expansions; those that end in EOS or reach max_len move to the finished
// pool and the rest form the next beam. The pool is returned sorted by
// normalized_score (ties: lexicographically smaller tokens first).
std::vector<Hypothesis> beam_search(const LanguageModel& model,
                                    std::span<const TokenId> prompt,
                                    const BeamConfig& cfg);

struct ExhaustiveResult {
  Hypothesis best;
  std::size_t sequences_enumerated = 0;  // all sequences of length 1..max_len
  std::size_t candidates = 0;            // of which complete hypotheses
};

inline constexpr double kExhaustiveLimit = 1e6;

// Visits every token sequence of length 1..max_len; complete hypotheses (EOS
// only in the last position, or no EOS at length max_len) are ranked exactly
// as beam_search ranks its finished pool. Refuses with kSearchTooLarge when
// V^max_len exceeds kExhaustiveLimit.
ExhaustiveResult exhaustive_search(const LanguageModel& model,
                                   std::span<const TokenId> prompt,
                                   const BeamConfig& cfg);

// Ranking used for finished hypotheses: true when `a` should precede `b`.
bool ranks_before(const Hypothesis& a, const Hypothesis& b,
                  double length_penalty);

}  // namespace scorelm
