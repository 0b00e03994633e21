// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/decode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scorelm/error.hpp"

namespace scorelm {
namespace {

void check_objective(const ScoreRule& rule) {
  switch (rule.kind()) {
    case RuleKind::kLogarithmic:
    case RuleKind::kBrier:
    case RuleKind::kSpherical:
      return;
    default:
      throw Error(ErrorCode::kConfiguration,
                  "decoding objective must be logarithmic, brier or spherical, "
                  "got " + rule.label());
  }
}

void check_prompt(const LanguageModel& model, std::span<const TokenId> prompt) {
  for (TokenId id : prompt) {
    if (id < 0 || id >= model.vocab_size()) {
      throw Error(ErrorCode::kInvalidInput,
                  "prompt token " + std::to_string(id) + " out of range");
    }
  }
}

// Distribution after prompt + generated prefix.
ProbVector next_distribution(const LanguageModel& model,
                             std::span<const TokenId> prompt,
                             std::span<const TokenId> generated) {
  std::vector<TokenId> history(prompt.begin(), prompt.end());
  history.insert(history.end(), generated.begin(), generated.end());
  const auto window =
      context_window(history, history.size(), model.context_size());
  return model.next_token(window);
}

// Objective values for every token of one distribution.
std::vector<double> objective_row(const ScoreRule& rule, const ProbVector& p) {
  std::vector<double> row(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) row[i] = normalized_objective(rule, p, i);
  return row;
}

bool closes(const Hypothesis& h, int max_len) {
  return (!h.tokens.empty() && h.tokens.back() == kEosId) ||
         h.tokens.size() >= static_cast<std::size_t>(max_len);
}

struct Candidate {
  std::size_t parent;
  TokenId token;
  double score;
};

}  // namespace

double normalized_objective(const ScoreRule& rule, const ProbVector& p,
                            std::size_t i) {
  check_objective(rule);
  const double s = score(rule, p, i);
  if (rule.kind() == RuleKind::kLogarithmic) return s;
  // Both bounded rules peak at 1; clamp the rounding excess above it.
  return std::min(s - 1.0, 0.0);
}

void BeamConfig::validate() const {
  if (beam_size < 1) throw Error(ErrorCode::kConfiguration, "beam_size must be >= 1");
  if (max_len < 1) throw Error(ErrorCode::kConfiguration, "max_len must be >= 1");
  if (!(length_penalty >= 0.0) || !std::isfinite(length_penalty)) {
    throw Error(ErrorCode::kConfiguration, "length_penalty must be >= 0");
  }
  check_objective(objective);
}

double Hypothesis::normalized_score(double length_penalty) const {
  if (length_penalty == 0.0 || tokens.empty()) return raw_score;
  return raw_score /
         std::pow(static_cast<double>(tokens.size()), length_penalty);
}

bool ranks_before(const Hypothesis& a, const Hypothesis& b,
                  double length_penalty) {
  const double sa = a.normalized_score(length_penalty);
  const double sb = b.normalized_score(length_penalty);
  if (sa != sb) return sa > sb;
  return a.tokens < b.tokens;
}

Hypothesis greedy(const LanguageModel& model, std::span<const TokenId> prompt,
                  int max_len) {
  if (max_len < 1) throw Error(ErrorCode::kConfiguration, "max_len must be >= 1");
  check_prompt(model, prompt);
  const ScoreRule log_rule = ScoreRule::logarithmic();
  Hypothesis h;
  while (!closes(h, max_len)) {
    const ProbVector p = next_distribution(model, prompt, h.tokens);
    // max_element returns the first maximum, i.e. the lowest id on ties.
    const auto best = static_cast<std::size_t>(
        std::max_element(p.begin(), p.end()) - p.begin());
    h.raw_score += normalized_objective(log_rule, p, best);
    h.tokens.push_back(static_cast<TokenId>(best));
  }
  h.finished = true;
  return h;
}

std::vector<Hypothesis> beam_search(const LanguageModel& model,
                                    std::span<const TokenId> prompt,
                                    const BeamConfig& cfg) {
  cfg.validate();
  check_prompt(model, prompt);
  const auto width = static_cast<std::size_t>(cfg.beam_size);

  std::vector<Hypothesis> beam(1);
  std::vector<Hypothesis> finished;
  std::vector<Candidate> candidates;

  for (int step = 0; step < cfg.max_len && !beam.empty(); ++step) {
    candidates.clear();
    for (std::size_t b = 0; b < beam.size(); ++b) {
      const ProbVector p = next_distribution(model, prompt, beam[b].tokens);
      const std::vector<double> row = objective_row(cfg.objective, p);
      for (std::size_t v = 0; v < row.size(); ++v) {
        candidates.push_back({b, static_cast<TokenId>(v), beam[b].raw_score + row[v]});
      }
    }
    // All candidates have the same length, so raw scores are comparable.
    const std::size_t keep = std::min(width, candidates.size());
    std::partial_sort(candidates.begin(),
                      candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });

    std::vector<Hypothesis> next;
    for (std::size_t c = 0; c < keep; ++c) {
      Hypothesis h;
      h.tokens = beam[candidates[c].parent].tokens;
      h.tokens.push_back(candidates[c].token);
      h.raw_score = candidates[c].score;
      if (closes(h, cfg.max_len)) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    beam = std::move(next);
  }

  if (finished.empty()) {
    throw Error(ErrorCode::kInternal, "beam search finished with an empty pool");
  }
  std::sort(finished.begin(), finished.end(),
            [&](const Hypothesis& a, const Hypothesis& b) {
              return ranks_before(a, b, cfg.length_penalty);
            });
  return finished;
}

ExhaustiveResult exhaustive_search(const LanguageModel& model,
                                   std::span<const TokenId> prompt,
                                   const BeamConfig& cfg) {
  cfg.validate();
  check_prompt(model, prompt);
  const double space = std::pow(static_cast<double>(model.vocab_size()),
                                static_cast<double>(cfg.max_len));
  if (space > kExhaustiveLimit) {
    throw Error(ErrorCode::kSearchTooLarge,
                "exhaustive search over V^max_len = " + std::to_string(space) +
                    " sequences exceeds the limit of 1e6");
  }

  ExhaustiveResult result;
  bool have_best = false;
  Hypothesis current;
  bool eos_inside = false;

  // Depth-first over every sequence; `eos_inside` marks prefixes that already
  // contain EOS, whose extensions are enumerated but never complete.
  auto visit = [&](auto&& self) -> void {
    const ProbVector p = next_distribution(model, prompt, current.tokens);
    const std::vector<double> row = objective_row(cfg.objective, p);
    for (std::size_t v = 0; v < row.size(); ++v) {
      const TokenId token = static_cast<TokenId>(v);
      current.tokens.push_back(token);
      const double saved = current.raw_score;
      current.raw_score += row[v];
      ++result.sequences_enumerated;

      const bool at_limit = current.tokens.size() == static_cast<std::size_t>(cfg.max_len);
      const bool complete = !eos_inside && (token == kEosId || at_limit);
      if (complete) {
        ++result.candidates;
        if (!have_best || ranks_before(current, result.best, cfg.length_penalty)) {
          result.best = current;
          result.best.finished = true;
          have_best = true;
        }
      }
      if (!at_limit) {
        const bool saved_inside = eos_inside;
        eos_inside = eos_inside || token == kEosId;
        self(self);
        eos_inside = saved_inside;
      }
      current.raw_score = saved;
      current.tokens.pop_back();
    }
  };
  visit(visit);
  return result;
}

}  // namespace scorelm
