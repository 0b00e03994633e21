// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "scorelm/error.hpp"
#include "scorelm/rng.hpp"
#include "scorelm/utf8.hpp"

namespace scorelm {
namespace {

std::size_t sample_categorical(std::span<const double> probs, SplitMix64& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0) continue;
    acc += probs[j];
    last_positive = j;
    if (u < acc) return j;
  }
  return last_positive;  // u landed in the rounding slack at the top
}

std::string code_point_label(char32_t cp) {
  std::ostringstream os;
  os << "'" << utf8::encode(cp) << "' (U+" << std::hex << std::uppercase
     << static_cast<std::uint32_t>(cp) << ")";
  return os.str();
}

}  // namespace

Vocab::Vocab(std::vector<char32_t> symbols) : symbols_(std::move(symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (i > 0 && symbols_[i] <= symbols_[i - 1]) {
      throw Error(ErrorCode::kInvalidInput,
                  "vocabulary symbols must be strictly increasing");
    }
    index_.emplace(symbols_[i], static_cast<TokenId>(i) + kFirstSymbolId);
  }
}

TokenId Vocab::id(char32_t symbol) const {
  const auto it = index_.find(symbol);
  if (it == index_.end()) {
    throw Error(ErrorCode::kInvalidInput,
                "character " + code_point_label(symbol) + " is not in the vocabulary");
  }
  return it->second;
}

char32_t Vocab::symbol(TokenId id) const {
  if (id < 0 || id >= size()) {
    throw Error(ErrorCode::kInvalidInput,
                "token id " + std::to_string(id) + " out of range");
  }
  if (id < kFirstSymbolId) return U'\0';
  return symbols_[static_cast<std::size_t>(id - kFirstSymbolId)];
}

Vocab build_vocab(std::string_view text) {
  if (text.empty()) {
    throw Error(ErrorCode::kInvalidInput, "cannot build a vocabulary from empty text");
  }
  const std::u32string decoded = utf8::decode(text);
  const std::set<char32_t> distinct(decoded.begin(), decoded.end());
  return Vocab(std::vector<char32_t>(distinct.begin(), distinct.end()));
}

TokenSeq encode(const Vocab& vocab, std::string_view text) {
  std::vector<TokenId> ids;
  for (char32_t cp : utf8::decode(text)) ids.push_back(vocab.id(cp));
  return TokenSeq::unmasked(std::move(ids));
}

std::string decode(const Vocab& vocab, std::span<const TokenId> tokens) {
  std::u32string out;
  for (TokenId id : tokens) {
    if (id == kPadId || id == kEosId) {
      vocab.symbol(id);  // range check only
      continue;
    }
    out.push_back(vocab.symbol(id));
  }
  return utf8::encode(out);
}

std::vector<Example> sliding_windows(std::span<const TokenId> tokens,
                                     int context) {
  const std::size_t k = static_cast<std::size_t>(context);
  if (context < 1 || tokens.size() <= k) {
    throw Error(ErrorCode::kInvalidInput,
                "corpus of " + std::to_string(tokens.size()) +
                    " tokens is too short for context " + std::to_string(context));
  }
  std::vector<Example> out;
  out.reserve(tokens.size() - k);
  for (std::size_t t = k; t < tokens.size(); ++t) {
    out.push_back({std::vector<TokenId>(tokens.begin() + static_cast<std::ptrdiff_t>(t - k),
                                        tokens.begin() + static_cast<std::ptrdiff_t>(t)),
                   tokens[t]});
  }
  return out;
}

BatchStream::BatchStream(std::vector<Example> examples, std::size_t batch_size,
                         std::uint64_t seed)
    : examples_(std::move(examples)), batch_size_(batch_size), seed_(seed) {
  if (examples_.empty()) {
    throw Error(ErrorCode::kInvalidInput, "batch stream needs at least one example");
  }
  if (batch_size_ == 0) {
    throw Error(ErrorCode::kConfiguration, "batch_size must be positive");
  }
  reshuffle();
}

std::size_t BatchStream::batches_per_epoch() const noexcept {
  return (examples_.size() + batch_size_ - 1) / batch_size_;
}

void BatchStream::reshuffle() {
  std::vector<std::size_t> perm(examples_.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  SplitMix64 rng(derive_seed(seed_, epoch_));
  for (std::size_t i = perm.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  order_.clear();
  order_.reserve(perm.size());
  for (std::size_t idx : perm) order_.push_back(examples_[idx]);
  cursor_ = 0;
}

std::span<const Example> BatchStream::next() {
  if (cursor_ >= order_.size()) {
    ++epoch_;
    reshuffle();
  }
  const std::size_t n = std::min(batch_size_, order_.size() - cursor_);
  std::span<const Example> batch(order_.data() + cursor_, n);
  cursor_ += n;
  return batch;
}

BatchStream make_batches(std::span<const TokenId> tokens, const BatchConfig& cfg) {
  return BatchStream(sliding_windows(tokens, cfg.context), cfg.batch_size, cfg.seed);
}

void MarkovSpec::validate() const {
  if (states < 2) {
    throw Error(ErrorCode::kInvalidInput, "Markov chain needs at least 2 states");
  }
  const auto k = static_cast<std::size_t>(states);
  if (transition.size() != k || initial.size() != k) {
    throw Error(ErrorCode::kInvalidInput,
                "transition matrix and initial distribution must have " +
                    std::to_string(states) + " rows/entries");
  }
  for (std::size_t r = 0; r < k; ++r) {
    if (transition[r].size() != k) {
      throw Error(ErrorCode::kInvalidInput,
                  "transition row " + std::to_string(r) + " has wrong length");
    }
    try {
      ProbVector row(transition[r]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidInput,
                  "transition row " + std::to_string(r) + ": " + e.what());
    }
  }
  try {
    ProbVector init(initial);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("initial distribution: ") + e.what());
  }
}

MarkovSample synth_markov(const MarkovSpec& spec, std::size_t length) {
  spec.validate();
  MarkovSample out;
  out.conditionals = spec.transition;
  out.states.reserve(length);
  SplitMix64 rng(spec.seed);
  if (length == 0) return out;
  std::size_t state = sample_categorical(spec.initial, rng);
  out.states.push_back(static_cast<int>(state));
  while (out.states.size() < length) {
    state = sample_categorical(spec.transition[state], rng);
    out.states.push_back(static_cast<int>(state));
  }
  return out;
}

MarkovSpec random_markov_spec(int states, std::uint64_t seed) {
  if (states < 2) {
    throw Error(ErrorCode::kInvalidInput, "Markov chain needs at least 2 states");
  }
  MarkovSpec spec;
  spec.states = states;
  spec.seed = seed;
  SplitMix64 rng(derive_seed(seed, 0x6d61726b6f76ULL));
  const auto k = static_cast<std::size_t>(states);
  spec.transition.assign(k, std::vector<double>(k));
  for (auto& row : spec.transition) {
    double total = 0.0;
    for (double& w : row) {
      w = rng.uniform(0.2, 1.0);
      total += w;
    }
    for (double& w : row) w /= total;
  }
  spec.initial.assign(k, 1.0 / static_cast<double>(k));
  return spec;
}

TokenSeq markov_tokens(std::span<const int> states) {
  std::vector<TokenId> ids;
  ids.reserve(states.size());
  for (int s : states) ids.push_back(static_cast<TokenId>(s) + kFirstSymbolId);
  return TokenSeq::unmasked(std::move(ids));
}

std::vector<PairRecord> parse_pairs(std::string_view jsonl) {
  std::vector<PairRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == jsonl.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedDocument, where + e.what());
    }
    if (!doc.is_object()) {
      throw Error(ErrorCode::kMalformedDocument, where + "expected a JSON object");
    }
    PairRecord rec;
    for (const char* field : {"source", "target"}) {
      const auto it = doc.find(field);
      if (it == doc.end() || !it->is_string()) {
        throw Error(ErrorCode::kMalformedDocument,
                    where + "missing string field \"" + field + "\"");
      }
    }
    rec.source = doc["source"].get<std::string>();
    rec.target = doc["target"].get<std::string>();
    out.push_back(std::move(rec));
    if (end == jsonl.size()) break;
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<PairRecord> load_pairs(const std::filesystem::path& path) {
  return parse_pairs(read_text_file(path));
}

TokenSeq pair_sequence(const Vocab& vocab, const PairRecord& record) {
  TokenSeq seq;
  for (TokenId id : encode(vocab, record.source).tokens) {
    seq.tokens.push_back(id);
    seq.loss_mask.push_back(false);
  }
  seq.tokens.push_back(kEosId);
  seq.loss_mask.push_back(false);
  for (TokenId id : encode(vocab, record.target).tokens) {
    seq.tokens.push_back(id);
    seq.loss_mask.push_back(true);
  }
  seq.tokens.push_back(kEosId);
  seq.loss_mask.push_back(true);
  return seq;
}

}  // namespace scorelm
