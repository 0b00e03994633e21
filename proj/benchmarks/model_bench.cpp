// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "scorelm/model.hpp"
#include "scorelm/rng.hpp"

namespace {

using namespace scorelm;

ModelConfig bench_config(int vocab) { return ModelConfig{vocab, 4, 32, 128, 7}; }

std::vector<Example> random_batch(const ModelConfig& cfg, std::size_t n) {
  SplitMix64 rng(11);
  const auto symbols = static_cast<std::uint64_t>(cfg.vocab_size - kFirstSymbolId);
  std::vector<Example> batch(n);
  for (Example& ex : batch) {
    for (int k = 0; k < cfg.context; ++k) {
      ex.context.push_back(static_cast<TokenId>(rng.below(symbols)) + kFirstSymbolId);
    }
    ex.target = static_cast<TokenId>(rng.below(symbols)) + kFirstSymbolId;
  }
  return batch;
}

void BM_Forward(benchmark::State& state) {
  const ModelConfig cfg = bench_config(static_cast<int>(state.range(0)));
  const Parameters params = init_params(cfg);
  const std::vector<TokenId> ctx = {2, 3, 4, 5};
  for (auto _ : state) benchmark::DoNotOptimize(forward(cfg, params, ctx));
}
BENCHMARK(BM_Forward)->Arg(64)->Arg(1024);

void BM_Backward(benchmark::State& state) {
  const ModelConfig cfg = bench_config(static_cast<int>(state.range(0)));
  const Parameters params = init_params(cfg);
  const std::vector<Example> batch = random_batch(cfg, 64);
  const ScoreRule rule = state.range(1) == 0 ? ScoreRule::logarithmic() : ScoreRule::spherical();
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(cfg, params, batch, rule, SmoothingConfig{}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
  state.SetLabel(rule.label());
}
BENCHMARK(BM_Backward)->ArgsProduct({{64, 1024}, {0, 1}});

}  // namespace
