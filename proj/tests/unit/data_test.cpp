// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/data.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "scorelm/error.hpp"
#include "scorelm/utf8.hpp"

namespace scorelm {
namespace {

TEST(Vocab, BuildCountsDistinctSymbols) {
  const Vocab v = build_vocab("aba");
  EXPECT_EQ(v.size(), 4);
  EXPECT_EQ(v.id(U'a'), 2);
  EXPECT_EQ(v.id(U'b'), 3);
  EXPECT_EQ(v.symbol(kEosId), U'\0');
}

TEST(Vocab, OrderIndependent) {
  EXPECT_EQ(build_vocab("ba"), build_vocab("ab"));
  EXPECT_EQ(build_vocab("hello"), build_vocab("hello"));
}

TEST(Vocab, EmptyTextRejected) { EXPECT_THROW(build_vocab(""), Error); }

TEST(Vocab, MultibyteSymbols) {
  const Vocab v = build_vocab("héé→");
  EXPECT_EQ(v.size(), 5);
  EXPECT_EQ(decode(v, encode(v, "→hé").tokens), "→hé");
}

TEST(Encode, RoundTrip) {
  const std::string text = "the quick brown fox\njumps";
  const Vocab v = build_vocab(text);
  const TokenSeq seq = encode(v, text);
  EXPECT_EQ(seq.size(), text.size());
  EXPECT_TRUE(std::all_of(seq.loss_mask.begin(), seq.loss_mask.end(), [](bool b) { return b; }));
  EXPECT_EQ(decode(v, seq.tokens), text);
}

TEST(Encode, EmptyText) { EXPECT_EQ(encode(build_vocab("a"), "").size(), 0u); }

TEST(Encode, UnknownSymbolNamed) {
  try {
    encode(build_vocab("ab"), "abz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
    EXPECT_NE(std::string(e.what()).find('z'), std::string::npos);
  }
}

TEST(Encode, InvalidUtf8Rejected) {
  EXPECT_THROW(build_vocab("a\xff"), Error);
}

TEST(Decode, ReservedIdsVanish) {
  const Vocab v = build_vocab("ab");
  const std::vector<TokenId> ids = {kPadId, 2, kEosId, 3, kEosId};
  EXPECT_EQ(decode(v, ids), "ab");
}

TEST(SlidingWindows, CountAndContent) {
  const std::vector<TokenId> tokens = {2, 3, 4, 5, 6};
  const auto ex = sliding_windows(tokens, 2);
  ASSERT_EQ(ex.size(), 3u);
  EXPECT_EQ(ex[0].context, (std::vector<TokenId>{2, 3}));
  EXPECT_EQ(ex[0].target, 4);
  EXPECT_EQ(ex[2].target, 6);
  EXPECT_THROW(sliding_windows(tokens, 5), Error);
}

TEST(Batches, EpochCoversEveryPositionOnce) {
  std::vector<TokenId> tokens(103);
  for (std::size_t k = 0; k < tokens.size(); ++k) tokens[k] = static_cast<TokenId>(k);
  BatchStream stream = make_batches(tokens, {3, 16, 9});
  EXPECT_EQ(stream.batches_per_epoch(), 7u);
  std::multiset<TokenId> targets;
  for (std::size_t b = 0; b < stream.batches_per_epoch(); ++b) {
    for (const Example& e : stream.next()) targets.insert(e.target);
  }
  EXPECT_EQ(targets.size(), 100u);
  for (TokenId t = 3; t < 103; ++t) EXPECT_EQ(targets.count(t), 1u);
  stream.next();
  EXPECT_EQ(stream.epoch(), 1u);
}

std::vector<TokenId> first_targets(BatchStream& s, int n) {
  std::vector<TokenId> out;
  for (int b = 0; b < n; ++b) {
    for (const Example& e : s.next()) out.push_back(e.target);
  }
  return out;
}

TEST(Batches, SeedDeterministic) {
  std::vector<TokenId> tokens(50);
  for (std::size_t k = 0; k < tokens.size(); ++k) tokens[k] = static_cast<TokenId>(k);
  BatchStream a = make_batches(tokens, {1, 8, 4});
  BatchStream b = make_batches(tokens, {1, 8, 4});
  BatchStream c = make_batches(tokens, {1, 8, 5});
  const auto ta = first_targets(a, 20);
  EXPECT_EQ(ta, first_targets(b, 20));
  EXPECT_NE(ta, first_targets(c, 20));
}

TEST(Batches, OversizedBatchIsSingleSmallerBatch) {
  const std::vector<TokenId> tokens = {2, 3, 4, 5};
  BatchStream s = make_batches(tokens, {1, 100, 0});
  EXPECT_EQ(s.batches_per_epoch(), 1u);
  EXPECT_EQ(s.next().size(), 3u);
}

TEST(Batches, TooShortCorpus) {
  const std::vector<TokenId> tokens = {2, 3};
  EXPECT_THROW(make_batches(tokens, {2, 4, 0}), Error);
}

TEST(Markov, IdentityIsAbsorbing) {
  MarkovSpec spec;
  spec.states = 3;
  spec.transition = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  spec.initial = {0, 1, 0};
  const MarkovSample s = synth_markov(spec, 200);
  EXPECT_TRUE(std::all_of(s.states.begin(), s.states.end(), [](int v) { return v == 1; }));
}

TEST(Markov, FairChainFrequencies) {
  MarkovSpec spec;
  spec.states = 2;
  spec.transition = {{0.5, 0.5}, {0.5, 0.5}};
  spec.initial = {0.5, 0.5};
  spec.seed = 3;
  const MarkovSample s = synth_markov(spec, 100000);
  double counts[2][2] = {};
  for (std::size_t t = 1; t < s.states.size(); ++t) counts[s.states[t - 1]][s.states[t]] += 1;
  for (auto& row : counts) EXPECT_NEAR(row[0] / (row[0] + row[1]), 0.5, 0.01);
}

TEST(Markov, DeterministicAndValid) {
  const MarkovSpec spec = random_markov_spec(4, 11);
  const MarkovSample a = synth_markov(spec, 1000);
  EXPECT_EQ(a.states, synth_markov(spec, 1000).states);
  ASSERT_EQ(a.conditionals.size(), 4u);
  for (const auto& row : a.conditionals) {
    EXPECT_NO_THROW(ProbVector{row});
    for (double v : row) EXPECT_GE(v, 0.2 / (0.2 + 3.0) - 1e-12);
  }
}

TEST(Markov, InvalidRowsRejected) {
  MarkovSpec spec;
  spec.states = 2;
  spec.transition = {{0.7, 0.7}, {0.5, 0.5}};
  spec.initial = {0.5, 0.5};
  EXPECT_THROW(synth_markov(spec, 10), Error);
}

TEST(Markov, TokensShiftPastReserved) {
  const std::vector<int> states = {0, 3, 1};
  EXPECT_EQ(markov_tokens(states).tokens, (std::vector<TokenId>{2, 5, 3}));
}

TEST(Pairs, ParseAndSequence) {
  const auto recs = parse_pairs("{\"source\":\"ab\",\"target\":\"c\"}\n\n");
  ASSERT_EQ(recs.size(), 1u);
  const TokenSeq seq = pair_sequence(build_vocab("abc"), recs[0]);
  EXPECT_EQ(seq.tokens, (std::vector<TokenId>{2, 3, kEosId, 4, kEosId}));
  EXPECT_EQ(seq.loss_mask, (std::vector<bool>{false, false, false, true, true}));
}

TEST(Pairs, EmptyInput) { EXPECT_TRUE(parse_pairs("").empty()); }

TEST(Pairs, MissingFieldNamed) {
  try {
    parse_pairs("{\"source\":\"a\",\"target\":\"b\"}\n{\"source\":\"a\"}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedDocument);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("target"), std::string::npos);
    EXPECT_NE(msg.find('2'), std::string::npos);
  }
}

TEST(Pairs, MalformedLineNumbered) {
  try {
    parse_pairs("{\"source\":\"a\",\"target\":\"b\"}\n{not json\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Pairs, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "scorelm_pairs_test.jsonl";
  {
    std::ofstream out(path);
    out << "{\"source\":\"x\",\"target\":\"yz\"}\n";
  }
  const auto recs = load_pairs(path);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].target, "yz");
  std::filesystem::remove(path);
  EXPECT_THROW(load_pairs(path), Error);
}

TEST(Utf8, RoundTrip) {
  const std::string s = "a\xc3\xa9\xe2\x86\x92\xf0\x9f\x98\x80";
  EXPECT_EQ(utf8::encode(utf8::decode(s)), s);
  EXPECT_THROW(utf8::decode("\xc0\x80"), Error);  // overlong
  EXPECT_THROW(utf8::decode("\xed\xa0\x80"), Error);  // surrogate
}

}  // namespace
}  // namespace scorelm
