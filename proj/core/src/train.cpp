// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/train.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "scorelm/data.hpp"
#include "scorelm/error.hpp"

namespace scorelm {
namespace {

void check_examples(std::span<const Example> examples, const ModelConfig& model,
                    const char* which) {
  for (const Example& ex : examples) {
    bool ok = ex.target >= 0 && ex.target < model.vocab_size &&
              ex.context.size() == static_cast<std::size_t>(model.context);
    for (TokenId id : ex.context) ok = ok && id >= 0 && id < model.vocab_size;
    if (!ok) {
      throw Error(ErrorCode::kInvalidInput,
                  std::string(which) +
                      " data does not fit the model's vocabulary or context");
    }
  }
}

std::optional<double> maybe_relative(double s_new, double s_old) {
  if (s_old == 0.0 || !std::isfinite(s_old) || !std::isfinite(s_new)) {
    return std::nullopt;
  }
  return relative_change(s_new, s_old);
}

TrainResult run_loop(const TrainConfig& cfg, const ModelConfig& model,
                     Parameters params, std::int64_t step_offset,
                     const TrainData& data) {
  check_examples(data.train, model, "training");
  check_examples(data.heldout, model, "held-out");
  if (data.heldout.empty()) {
    throw Error(ErrorCode::kInvalidInput, "held-out split is empty");
  }

  TrainResult result;
  result.reference = evaluate_scores(model, params, data.heldout);

  if (cfg.steps > 0) {
    if (data.train.empty()) {
      throw Error(ErrorCode::kInvalidInput, "training split is empty");
    }
    BatchStream stream(data.train, cfg.batch_size, cfg.seed);
    AdamState state = AdamState::zeros(model);
    for (std::int64_t step = 1; step <= cfg.steps; ++step) {
      const Gradients g = backward(model, params, stream.next(), cfg.rule,
                                   cfg.smoothing);
      adam_step(params, g.grads, state, step, cfg);
      if (step % cfg.eval_every == 0 || step == cfg.steps) {
        const HeldoutScores scores = evaluate_scores(model, params, data.heldout);
        result.metrics.push_back(
            make_record(step + step_offset, g.loss, scores, result.reference));
      }
    }
  }

  result.checkpoint.model = model;
  result.checkpoint.rule = cfg.rule;
  result.checkpoint.smoothing = cfg.smoothing;
  result.checkpoint.step = step_offset + cfg.steps;
  result.checkpoint.params = std::move(params);
  return result;
}

}  // namespace

void TrainConfig::validate(bool allow_zero_steps) const {
  smoothing.validate();
  if (steps < 0 || (steps == 0 && !allow_zero_steps)) {
    throw Error(ErrorCode::kConfiguration,
                "steps must be positive, got " + std::to_string(steps));
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kConfiguration, "learning_rate must be positive");
  }
  if (batch_size == 0) {
    throw Error(ErrorCode::kConfiguration, "batch_size must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      !(adam_eps > 0.0)) {
    throw Error(ErrorCode::kConfiguration, "Adam betas must lie in [0, 1) and eps > 0");
  }
  if (warmup_steps < 0) {
    throw Error(ErrorCode::kConfiguration, "warmup_steps must be non-negative");
  }
  if (eval_every < 1) {
    throw Error(ErrorCode::kConfiguration, "eval_every must be positive");
  }
}

AdamState AdamState::zeros(const ModelConfig& cfg) {
  return {Parameters::zeros(cfg), Parameters::zeros(cfg)};
}

void adam_step(Parameters& params, const Parameters& grads, AdamState& state,
               std::int64_t step, const TrainConfig& cfg) {
  if (step < 1) {
    throw Error(ErrorCode::kInvalidInput, "Adam step index starts at 1");
  }
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i]->size() != p[i]->size() || m[i]->size() != p[i]->size() ||
        v[i]->size() != p[i]->size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "gradient for '" + std::string(Parameters::kNames[i]) +
                      "' does not match the parameter shape");
    }
    for (double x : g[i]->values) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::kNonFinite,
                    "non-finite gradient in tensor '" +
                        std::string(Parameters::kNames[i]) + "'");
      }
    }
  }

  const double t = static_cast<double>(step);
  const double warmup =
      cfg.warmup_steps > 0
          ? std::min(1.0, t / static_cast<double>(cfg.warmup_steps))
          : 1.0;
  const double lr = cfg.learning_rate * warmup;
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& pv = p[i]->values;
    const auto& gv = g[i]->values;
    auto& mv = m[i]->values;
    auto& vv = v[i]->values;
    for (std::size_t k = 0; k < pv.size(); ++k) {
      mv[k] = cfg.beta1 * mv[k] + (1.0 - cfg.beta1) * gv[k];
      vv[k] = cfg.beta2 * vv[k] + (1.0 - cfg.beta2) * gv[k] * gv[k];
      const double m_hat = mv[k] / correction1;
      const double v_hat = vv[k] / correction2;
      pv[k] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  }
}

TrainData split_tokens(std::span<const TokenId> tokens, int context) {
  const std::size_t n = tokens.size();
  const std::size_t k = static_cast<std::size_t>(context);
  const std::size_t held = std::max<std::size_t>(1, n / 10);
  if (context < 1 || n < held + k + 1) {
    throw Error(ErrorCode::kInvalidInput,
                "corpus of " + std::to_string(n) +
                    " tokens is too short to split with context " +
                    std::to_string(context));
  }
  const std::size_t cut = n - held;
  TrainData data;
  data.train = sliding_windows(tokens.first(cut), context);
  for (std::size_t t = cut; t < n; ++t) {
    data.heldout.push_back({context_window(tokens, t, context), tokens[t]});
  }
  return data;
}

TrainData split_sequences(std::span<const TokenSeq> sequences, int context) {
  if (sequences.size() < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "need at least two sequences to hold one out");
  }
  const std::size_t held = std::max<std::size_t>(1, sequences.size() / 10);
  const std::size_t cut = sequences.size() - held;
  TrainData data;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    auto ex = sequence_examples(sequences[i], context);
    auto& dst = i < cut ? data.train : data.heldout;
    dst.insert(dst.end(), std::make_move_iterator(ex.begin()),
               std::make_move_iterator(ex.end()));
  }
  return data;
}

HeldoutScores evaluate_scores(const ModelConfig& cfg, const Parameters& params,
                              std::span<const Example> examples) {
  HeldoutScores out;
  if (examples.empty()) return out;
  const ScoreRule log_rule = ScoreRule::logarithmic();
  const ScoreRule brier = ScoreRule::brier();
  const ScoreRule spherical = ScoreRule::spherical();
  for (const Example& ex : examples) {
    const ProbVector p = forward(cfg, params, ex.context);
    const auto i = static_cast<std::size_t>(ex.target);
    out.logarithmic += score(log_rule, p, i);
    out.brier += score(brier, p, i);
    out.spherical += score(spherical, p, i);
  }
  const double n = static_cast<double>(examples.size());
  out.logarithmic /= n;
  out.brier /= n;
  out.spherical /= n;
  return out;
}

MetricsRecord make_record(std::int64_t step, double loss,
                          const HeldoutScores& scores,
                          const HeldoutScores& reference) {
  MetricsRecord rec;
  rec.step = step;
  rec.loss = loss;
  rec.scores = scores;
  const double ppl = std::exp(-scores.logarithmic);
  if (std::isfinite(ppl)) rec.ppl = ppl;
  rec.rel_log = maybe_relative(scores.logarithmic, reference.logarithmic);
  rec.rel_brier = maybe_relative(scores.brier, reference.brier);
  rec.rel_spherical = maybe_relative(scores.spherical, reference.spherical);
  return rec;
}

std::string metrics_to_jsonl(std::span<const MetricsRecord> records) {
  auto num = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  std::ostringstream out;
  for (const MetricsRecord& r : records) {
    // ordered_json keeps the documented field order on every line.
    nlohmann::ordered_json line;
    line["step"] = r.step;
    line["loss"] = num(r.loss);
    line["score_log"] = num(r.scores.logarithmic);
    line["score_brier"] = num(r.scores.brier);
    line["score_spherical"] = num(r.scores.spherical);
    line["ppl"] = opt(r.ppl);
    line["rel_log"] = opt(r.rel_log);
    line["rel_brier"] = opt(r.rel_brier);
    line["rel_spherical"] = opt(r.rel_spherical);
    out << line.dump() << '\n';
  }
  return out.str();
}

double relative_change(double s_new, double s_old) {
  if (s_old == 0.0) {
    throw Error(ErrorCode::kUndefinedReference,
                "relative change is undefined for a zero reference score");
  }
  return (s_new - s_old) / std::abs(s_old);
}

TrainResult train(const TrainConfig& cfg, const ModelConfig& model,
                  const TrainData& data) {
  cfg.validate();
  model.validate();
  return run_loop(cfg, model, init_params(model), 0, data);
}

TrainResult finetune(const Checkpoint& base, const ModelConfig& model,
                     const TrainConfig& cfg, const TrainData& data) {
  cfg.validate(/*allow_zero_steps=*/true);
  std::string diff;
  auto compare = [&](const char* field, int want, int have) {
    if (want != have) {
      if (!diff.empty()) diff += ", ";
      diff += std::string(field) + " (checkpoint " + std::to_string(have) +
              ", requested " + std::to_string(want) + ")";
    }
  };
  compare("vocab_size", model.vocab_size, base.model.vocab_size);
  compare("context", model.context, base.model.context);
  compare("embed_dim", model.embed_dim, base.model.embed_dim);
  compare("hidden_dim", model.hidden_dim, base.model.hidden_dim);
  if (!diff.empty()) {
    throw Error(ErrorCode::kConfiguration,
                "model config does not match the base checkpoint: " + diff);
  }
  base.params.check_shapes(base.model);

  TrainResult result = run_loop(cfg, base.model, base.params, base.step, data);
  result.checkpoint.vocab = base.vocab;
  if (cfg.steps == 0) {
    // A zero-step fine-tune is the identity on the checkpoint.
    result.checkpoint = base;
  }
  return result;
}

}  // namespace scorelm
