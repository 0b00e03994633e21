// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "scorelm/scores.hpp"
#include "scorelm/simplex.hpp"

namespace scorelm {

using TokenId = std::int32_t;

// Reserved ids. Real symbols start at kFirstSymbolId.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kEosId = 1;
inline constexpr TokenId kFirstSymbolId = 2;

struct ModelConfig {
  int vocab_size = 2;
  int context = 1;
  int embed_dim = 8;
  int hidden_dim = 32;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Row-major dense matrix; biases are stored as 1 x n.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::size_t size() const noexcept { return values.size(); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Weights of the fixed-context feedforward next-token model:
//   e = [E[x_{t-K}], ..., E[x_{t-1}]]          (K*d)
//   h = tanh(e W_h + b_h)                       (hidden)
//   p = softmax(h W_o + b_o)                    (V)
struct Parameters {
  Tensor embedding;      // V x d
  Tensor hidden_weight;  // (K*d) x h
  Tensor hidden_bias;    // 1 x h
  Tensor output_weight;  // h x V
  Tensor output_bias;    // 1 x V

  // Zero tensors shaped for `cfg`.
  static Parameters zeros(const ModelConfig& cfg);

  static constexpr std::array<std::string_view, 5> kNames = {
      "embedding", "hidden_weight", "hidden_bias", "output_weight",
      "output_bias"};

  std::array<Tensor*, 5> tensors() noexcept {
    return {&embedding, &hidden_weight, &hidden_bias, &output_weight,
            &output_bias};
  }
  std::array<const Tensor*, 5> tensors() const noexcept {
    return {&embedding, &hidden_weight, &hidden_bias, &output_weight,
            &output_bias};
  }

  std::size_t scalar_count() const noexcept;
  // Throws kShapeMismatch naming the first offending tensor.
  void check_shapes(const ModelConfig& cfg) const;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

struct TokenSeq {
  std::vector<TokenId> tokens;
  std::vector<bool> loss_mask;

  // All positions scored.
  static TokenSeq unmasked(std::vector<TokenId> tokens);
  std::size_t size() const noexcept { return tokens.size(); }
  void validate(int vocab_size) const;
};

// One scored position: K ids of left context and the target that follows.
struct Example {
  std::vector<TokenId> context;
  TokenId target = kPadId;
};

// Context window of length K ending just before position `t` of `tokens`,
// left-padded with kPadId.
std::vector<TokenId> context_window(std::span<const TokenId> tokens,
                                    std::size_t t, int context);

// Scored positions of a sequence, in order.
std::vector<Example> sequence_examples(const TokenSeq& seq, int context);

// Anything that yields next-token distributions over a fixed vocabulary can be
// decoded; the feedforward model below is the only implementation shipped.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual int vocab_size() const = 0;
  virtual int context_size() const = 0;
  // `context` holds exactly context_size() ids.
  virtual ProbVector next_token(std::span<const TokenId> context) const = 0;
};

// Deterministic init from cfg.seed through SplitMix64: weights uniform in
// [-1/sqrt(fan_in), 1/sqrt(fan_in)] (embedding fan-in 1, hidden K*d,
// output h) drawn in tensor order, biases zero.
Parameters init_params(const ModelConfig& cfg);

// Output logits for a context of exactly cfg.context ids.
std::vector<double> forward_logits(const ModelConfig& cfg,
                                   const Parameters& params,
                                   std::span<const TokenId> context);

ProbVector forward(const ModelConfig& cfg, const Parameters& params,
                   std::span<const TokenId> context);

struct SequenceLoss {
  double loss = 0.0;
  std::size_t scored_tokens = 0;
  // Set when no position was scored; the loss is then 0.
  bool empty_mask = false;
};

// -sum over unmasked positions of the (training-clamped) variant score.
SequenceLoss sequence_loss(const ModelConfig& cfg, const Parameters& params,
                           const TokenSeq& seq, const ScoreRule& rule,
                           const SmoothingConfig& smoothing);

struct Gradients {
  double loss = 0.0;  // mean per scored token
  std::size_t scored_tokens = 0;
  Parameters grads;
};

// Exact gradients of the per-token mean loss over all scored positions of the
// batch. Positions are processed sequentially in batch order, so the
// floating-point reduction order is fixed.
Gradients backward(const ModelConfig& cfg, const Parameters& params,
                   std::span<const Example> batch, const ScoreRule& rule,
                   const SmoothingConfig& smoothing);

Gradients backward(const ModelConfig& cfg, const Parameters& params,
                   std::span<const TokenSeq> batch, const ScoreRule& rule,
                   const SmoothingConfig& smoothing);

class FeedForwardModel final : public LanguageModel {
 public:
  FeedForwardModel(ModelConfig cfg, Parameters params);

  int vocab_size() const override { return cfg_.vocab_size; }
  int context_size() const override { return cfg_.context; }
  ProbVector next_token(std::span<const TokenId> context) const override;

  const ModelConfig& config() const noexcept { return cfg_; }
  const Parameters& params() const noexcept { return params_; }

 private:
  ModelConfig cfg_;
  Parameters params_;
};

}  // namespace scorelm
