// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/model.hpp"

#include <cmath>
#include <string>

#include "scorelm/error.hpp"
#include "scorelm/rng.hpp"

namespace scorelm {
namespace {

std::size_t to_size(int v) { return static_cast<std::size_t>(v); }

void check_context(const ModelConfig& cfg, std::span<const TokenId> context) {
  if (context.size() != to_size(cfg.context)) {
    throw Error(ErrorCode::kInvalidInput,
                "context must hold exactly " + std::to_string(cfg.context) +
                    " ids, got " + std::to_string(context.size()));
  }
  for (TokenId id : context) {
    if (id < 0 || id >= cfg.vocab_size) {
      throw Error(ErrorCode::kInvalidInput,
                  "token id " + std::to_string(id) + " out of range [0, " +
                      std::to_string(cfg.vocab_size) + ")");
    }
  }
}

// Intermediate activations of one forward pass.
struct Activations {
  std::vector<double> input;   // K*d
  std::vector<double> hidden;  // h, post-tanh
  std::vector<double> logits;  // V
  std::vector<double> probs;   // V
};

void run_forward(const ModelConfig& cfg, const Parameters& w,
                 std::span<const TokenId> context, Activations& act) {
  const std::size_t d = to_size(cfg.embed_dim);
  const std::size_t h = to_size(cfg.hidden_dim);
  const std::size_t v = to_size(cfg.vocab_size);

  act.input.resize(context.size() * d);
  for (std::size_t k = 0; k < context.size(); ++k) {
    const std::size_t row = static_cast<std::size_t>(context[k]);
    for (std::size_t c = 0; c < d; ++c) act.input[k * d + c] = w.embedding(row, c);
  }

  act.hidden.assign(w.hidden_bias.values.begin(), w.hidden_bias.values.end());
  for (std::size_t r = 0; r < act.input.size(); ++r) {
    const double x = act.input[r];
    const double* wrow = &w.hidden_weight.values[r * h];
    for (std::size_t c = 0; c < h; ++c) act.hidden[c] += x * wrow[c];
  }
  for (double& a : act.hidden) a = std::tanh(a);

  act.logits.assign(w.output_bias.values.begin(), w.output_bias.values.end());
  for (std::size_t r = 0; r < h; ++r) {
    const double x = act.hidden[r];
    const double* wrow = &w.output_weight.values[r * v];
    for (std::size_t c = 0; c < v; ++c) act.logits[c] += x * wrow[c];
  }
  act.probs.resize(v);
  softmax_into(act.logits, act.probs);
}

void fill_uniform(Tensor& t, double scale, SplitMix64& rng) {
  for (double& x : t.values) x = rng.uniform(-scale, scale);
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 2) {
    throw Error(ErrorCode::kConfiguration, "vocab_size must be >= 2");
  }
  if (context < 1 || embed_dim < 1 || hidden_dim < 1) {
    throw Error(ErrorCode::kConfiguration,
                "context, embed_dim and hidden_dim must all be >= 1");
  }
}

Parameters Parameters::zeros(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t v = to_size(cfg.vocab_size);
  const std::size_t d = to_size(cfg.embed_dim);
  const std::size_t h = to_size(cfg.hidden_dim);
  const std::size_t k = to_size(cfg.context);
  Parameters p;
  p.embedding = Tensor(v, d);
  p.hidden_weight = Tensor(k * d, h);
  p.hidden_bias = Tensor(1, h);
  p.output_weight = Tensor(h, v);
  p.output_bias = Tensor(1, v);
  return p;
}

std::size_t Parameters::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const Tensor* t : tensors()) n += t->size();
  return n;
}

void Parameters::check_shapes(const ModelConfig& cfg) const {
  const Parameters expected = zeros(cfg);
  const auto want = expected.tensors();
  const auto have = tensors();
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i]->rows != have[i]->rows || want[i]->cols != have[i]->cols ||
        have[i]->values.size() != have[i]->rows * have[i]->cols) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor '" + std::string(kNames[i]) + "' has shape " +
                      std::to_string(have[i]->rows) + "x" +
                      std::to_string(have[i]->cols) + ", expected " +
                      std::to_string(want[i]->rows) + "x" +
                      std::to_string(want[i]->cols));
    }
  }
}

TokenSeq TokenSeq::unmasked(std::vector<TokenId> tokens) {
  TokenSeq seq;
  seq.loss_mask.assign(tokens.size(), true);
  seq.tokens = std::move(tokens);
  return seq;
}

void TokenSeq::validate(int vocab_size) const {
  if (tokens.size() != loss_mask.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "token sequence and loss mask differ in length");
  }
  for (TokenId id : tokens) {
    if (id < 0 || id >= vocab_size) {
      throw Error(ErrorCode::kInvalidInput,
                  "token id " + std::to_string(id) + " out of range");
    }
  }
}

std::vector<TokenId> context_window(std::span<const TokenId> tokens,
                                    std::size_t t, int context) {
  const std::size_t k = to_size(context);
  std::vector<TokenId> window(k, kPadId);
  for (std::size_t j = 0; j < k; ++j) {
    // window[k-1] is tokens[t-1], window[0] is tokens[t-k].
    const std::size_t back = k - j;
    if (t >= back) window[j] = tokens[t - back];
  }
  return window;
}

std::vector<Example> sequence_examples(const TokenSeq& seq, int context) {
  std::vector<Example> out;
  for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
    if (!seq.loss_mask[t]) continue;
    out.push_back({context_window(seq.tokens, t, context), seq.tokens[t]});
  }
  return out;
}

Parameters init_params(const ModelConfig& cfg) {
  Parameters p = Parameters::zeros(cfg);
  SplitMix64 rng(cfg.seed);
  const double hidden_fan_in = static_cast<double>(cfg.context * cfg.embed_dim);
  fill_uniform(p.embedding, 1.0, rng);
  fill_uniform(p.hidden_weight, 1.0 / std::sqrt(hidden_fan_in), rng);
  fill_uniform(p.output_weight, 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim)),
               rng);
  return p;
}

std::vector<double> forward_logits(const ModelConfig& cfg,
                                   const Parameters& params,
                                   std::span<const TokenId> context) {
  check_context(cfg, context);
  Activations act;
  run_forward(cfg, params, context, act);
  return std::move(act.logits);
}

ProbVector forward(const ModelConfig& cfg, const Parameters& params,
                   std::span<const TokenId> context) {
  check_context(cfg, context);
  Activations act;
  run_forward(cfg, params, context, act);
  return ProbVector(std::move(act.probs));
}

SequenceLoss sequence_loss(const ModelConfig& cfg, const Parameters& params,
                           const TokenSeq& seq, const ScoreRule& rule,
                           const SmoothingConfig& smoothing) {
  smoothing.validate();
  seq.validate(cfg.vocab_size);
  if (seq.tokens.empty()) {
    throw Error(ErrorCode::kInvalidInput, "sequence must be non-empty");
  }
  SequenceLoss out;
  Activations act;
  for (const Example& ex : sequence_examples(seq, cfg.context)) {
    run_forward(cfg, params, ex.context, act);
    out.loss += token_loss(rule, smoothing, act.probs,
                           static_cast<std::size_t>(ex.target));
    ++out.scored_tokens;
  }
  out.empty_mask = out.scored_tokens == 0;
  return out;
}

Gradients backward(const ModelConfig& cfg, const Parameters& params,
                   std::span<const Example> batch, const ScoreRule& rule,
                   const SmoothingConfig& smoothing) {
  smoothing.validate();
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidInput, "batch must be non-empty");
  }
  const std::size_t d = to_size(cfg.embed_dim);
  const std::size_t h = to_size(cfg.hidden_dim);
  const std::size_t v = to_size(cfg.vocab_size);

  Gradients out;
  out.grads = Parameters::zeros(cfg);
  Parameters& g = out.grads;

  Activations act;
  std::vector<double> dlogits(v), dhidden(h), dinput;
  for (const Example& ex : batch) {
    check_context(cfg, ex.context);
    if (ex.target < 0 || ex.target >= cfg.vocab_size) {
      throw Error(ErrorCode::kInvalidInput, "target id out of range");
    }
    run_forward(cfg, params, ex.context, act);
    out.loss += token_loss_and_gradient(rule, smoothing, act.probs,
                                        static_cast<std::size_t>(ex.target),
                                        dlogits);
    ++out.scored_tokens;

    for (std::size_t c = 0; c < v; ++c) g.output_bias.values[c] += dlogits[c];
    for (std::size_t r = 0; r < h; ++r) {
      const double hr = act.hidden[r];
      double* grow = &g.output_weight.values[r * v];
      const double* wrow = &params.output_weight.values[r * v];
      double back = 0.0;
      for (std::size_t c = 0; c < v; ++c) {
        grow[c] += hr * dlogits[c];
        back += wrow[c] * dlogits[c];
      }
      dhidden[r] = back * (1.0 - hr * hr);
    }

    for (std::size_t c = 0; c < h; ++c) g.hidden_bias.values[c] += dhidden[c];
    dinput.assign(act.input.size(), 0.0);
    for (std::size_t r = 0; r < act.input.size(); ++r) {
      const double x = act.input[r];
      double* grow = &g.hidden_weight.values[r * h];
      const double* wrow = &params.hidden_weight.values[r * h];
      double back = 0.0;
      for (std::size_t c = 0; c < h; ++c) {
        grow[c] += x * dhidden[c];
        back += wrow[c] * dhidden[c];
      }
      dinput[r] = back;
    }
    for (std::size_t k = 0; k < ex.context.size(); ++k) {
      const std::size_t row = static_cast<std::size_t>(ex.context[k]);
      for (std::size_t c = 0; c < d; ++c) g.embedding(row, c) += dinput[k * d + c];
    }
  }

  const double scale = 1.0 / static_cast<double>(out.scored_tokens);
  out.loss *= scale;
  for (Tensor* t : g.tensors()) {
    for (double& x : t->values) x *= scale;
  }
  return out;
}

Gradients backward(const ModelConfig& cfg, const Parameters& params,
                   std::span<const TokenSeq> batch, const ScoreRule& rule,
                   const SmoothingConfig& smoothing) {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidInput, "batch must be non-empty");
  }
  std::vector<Example> examples;
  for (const TokenSeq& seq : batch) {
    seq.validate(cfg.vocab_size);
    auto ex = sequence_examples(seq, cfg.context);
    examples.insert(examples.end(), std::make_move_iterator(ex.begin()),
                    std::make_move_iterator(ex.end()));
  }
  if (examples.empty()) {
    // Nothing scored: zero loss and zero gradient.
    Gradients out;
    out.grads = Parameters::zeros(cfg);
    return out;
  }
  return backward(cfg, params, examples, rule, smoothing);
}

FeedForwardModel::FeedForwardModel(ModelConfig cfg, Parameters params)
    : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
  params_.check_shapes(cfg_);
}

ProbVector FeedForwardModel::next_token(std::span<const TokenId> context) const {
  return forward(cfg_, params_, context);
}

}  // namespace scorelm
