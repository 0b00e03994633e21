// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorelm/model.hpp"

namespace scorelm {

// Character vocabulary. Ids 0 and 1 are pad and EOS; symbols follow in code
// point order, so the vocabulary depends only on the set of characters.
class Vocab {
 public:
  Vocab() = default;
  // `symbols` must be strictly increasing code points.
  explicit Vocab(std::vector<char32_t> symbols);

  int size() const noexcept {
    return static_cast<int>(symbols_.size()) + kFirstSymbolId;
  }
  const std::vector<char32_t>& symbols() const noexcept { return symbols_; }

  // Throws kInvalidInput for characters outside the vocabulary.
  TokenId id(char32_t symbol) const;
  // Reserved ids map to U'\0'.
  char32_t symbol(TokenId id) const;

  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  std::vector<char32_t> symbols_;
  std::map<char32_t, TokenId> index_;
};

Vocab build_vocab(std::string_view text);

// Every position is scored.
TokenSeq encode(const Vocab& vocab, std::string_view text);
// Pad and EOS contribute nothing to the output.
std::string decode(const Vocab& vocab, std::span<const TokenId> tokens);

struct BatchConfig {
  int context = 1;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

// Sliding-window examples (tokens[t-K..t), tokens[t]) for t = K .. L-1.
std::vector<Example> sliding_windows(std::span<const TokenId> tokens,
                                     int context);

// Endless stream of shuffled batches. Each epoch is a fresh SplitMix64
// Fisher-Yates permutation seeded from (seed, epoch), so every example
// appears exactly once per epoch and the order is reproducible.
class BatchStream {
 public:
  BatchStream(std::vector<Example> examples, std::size_t batch_size,
              std::uint64_t seed);

  std::span<const Example> next();

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batches_per_epoch() const noexcept;
  std::size_t example_count() const noexcept { return examples_.size(); }

 private:
  void reshuffle();

  std::vector<Example> examples_;
  std::vector<Example> order_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::size_t cursor_ = 0;
};

// Requires tokens.size() > cfg.context.
BatchStream make_batches(std::span<const TokenId> tokens, const BatchConfig& cfg);

struct MarkovSpec {
  int states = 2;
  std::vector<std::vector<double>> transition;  // states x states
  std::vector<double> initial;                  // states
  std::uint64_t seed = 0;

  void validate() const;
};

struct MarkovSample {
  std::vector<int> states;                        // sampled path
  std::vector<std::vector<double>> conditionals;  // q(x_t | x_{t-1})
};

MarkovSample synth_markov(const MarkovSpec& spec, std::size_t length);

// Random row-stochastic chain: each row is uniform(0.2, 1) weights normalized.
MarkovSpec random_markov_spec(int states, std::uint64_t seed);

// Shifts state ids past the reserved tokens: state s becomes token s + 2.
TokenSeq markov_tokens(std::span<const int> states);

struct PairRecord {
  std::string source;
  std::string target;
};

// JSON-lines with string fields "source" and "target"; blank lines skipped.
// Errors carry the 1-based line number.
std::vector<PairRecord> load_pairs(const std::filesystem::path& path);
std::vector<PairRecord> parse_pairs(std::string_view jsonl);

// source + EOS + target + EOS, scoring only target + final EOS.
TokenSeq pair_sequence(const Vocab& vocab, const PairRecord& record);

// Reads a whole file as bytes.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace scorelm
