// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scorelm/checkpoint.hpp"
#include "scorelm/model.hpp"
#include "scorelm/scores.hpp"

namespace scorelm {

struct TrainConfig {
  ScoreRule rule = ScoreRule::logarithmic();
  SmoothingConfig smoothing;
  std::int64_t steps = 1000;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::int64_t warmup_steps = 100;
  std::int64_t eval_every = 100;
  std::uint64_t seed = 0;

  // steps > 0 unless `allow_zero_steps` (fine-tuning may be a no-op).
  void validate(bool allow_zero_steps = false) const;
};

struct AdamState {
  Parameters first_moment;
  Parameters second_moment;

  static AdamState zeros(const ModelConfig& cfg);
};

// One bias-corrected Adam update with learning rate
//   lr * min(1, step / warmup_steps),
// `step` counting from 1. Throws kNonFinite naming the tensor if any gradient
// entry is NaN or infinite; nothing is modified in that case.
void adam_step(Parameters& params, const Parameters& grads, AdamState& state,
               std::int64_t step, const TrainConfig& cfg);

struct TrainData {
  std::vector<Example> train;
  std::vector<Example> heldout;
};

// The last 10% of the token stream is held out and never shuffled into
// training.
TrainData split_tokens(std::span<const TokenId> tokens, int context);
// Same split at sequence granularity; needs at least two sequences.
TrainData split_sequences(std::span<const TokenSeq> sequences, int context);

struct HeldoutScores {
  double logarithmic = 0.0;
  double brier = 0.0;
  double spherical = 0.0;
};

// Mean per-token (unclamped) score of each rule over the examples.
HeldoutScores evaluate_scores(const ModelConfig& cfg, const Parameters& params,
                              std::span<const Example> examples);

struct MetricsRecord {
  std::int64_t step = 0;
  double loss = 0.0;
  HeldoutScores scores;
  std::optional<double> ppl;  // exp(-scores.logarithmic) when finite
  std::optional<double> rel_log;
  std::optional<double> rel_brier;
  std::optional<double> rel_spherical;
};

MetricsRecord make_record(std::int64_t step, double loss,
                          const HeldoutScores& scores,
                          const HeldoutScores& reference);

// One JSON object per line with the keys step, loss, score_log, score_brier,
// score_spherical, ppl, rel_log, rel_brier, rel_spherical; undefined values
// are written as null.
std::string metrics_to_jsonl(std::span<const MetricsRecord> records);

// (s_new - s_old) / |s_old|; kUndefinedReference when s_old == 0.
double relative_change(double s_new, double s_old);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRecord> metrics;
  HeldoutScores reference;
};

// Trains from init_params(model). Relative changes are measured against the
// initialization.
TrainResult train(const TrainConfig& cfg, const ModelConfig& model,
                  const TrainData& data);

// Continues from `base` with a fresh optimizer state. `model` must agree with
// the checkpoint on every architectural field; the seed is not compared.
// Relative changes are measured against the base parameters.
TrainResult finetune(const Checkpoint& base, const ModelConfig& model,
                     const TrainConfig& cfg, const TrainData& data);

}  // namespace scorelm
