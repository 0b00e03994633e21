// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/cli/config.hpp"

#include <algorithm>

#include "scorelm/data.hpp"
#include "scorelm/error.hpp"

namespace scorelm::cli {
namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfiguration,
                "config key \"" + key + "\" has the wrong type");
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "corpus",       "pairs",         "metrics",      "checkpoint",
      "context",      "embed_dim",     "hidden_dim",   "seed",
      "rule",         "alpha",         "eps",          "mask_enhanced",
      "steps",        "batch_size",    "learning_rate", "beta1",
      "beta2",        "adam_eps",      "warmup_steps", "eval_every",
      "beam_size",    "max_len",       "length_penalty", "objective"};
  return keys;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.model.context = 4;
  cfg.model.embed_dim = 16;
  cfg.model.hidden_dim = 64;
  cfg.model.seed = 1;
  cfg.train.steps = 1000;
  cfg.train.batch_size = 64;
  cfg.train.learning_rate = 1e-3;
  cfg.train.warmup_steps = 100;
  cfg.train.eval_every = 100;
  cfg.train.seed = 1;
  cfg.beam.beam_size = 4;
  cfg.beam.max_len = 32;
  return cfg;
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kConfiguration, "config must be a JSON object");
  }
  const auto& keys = config_keys();
  for (const auto& [key, value] : doc.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(ErrorCode::kConfiguration, "unknown config key \"" + key + "\"");
    }
  }

  RunConfig cfg = default_run_config();
  auto has = [&](const char* key) { return doc.contains(key); };
  if (has("corpus")) cfg.corpus = get_as<std::string>(doc, "corpus");
  if (has("pairs")) cfg.pairs = get_as<std::string>(doc, "pairs");
  if (has("metrics")) cfg.metrics = get_as<std::string>(doc, "metrics");
  if (has("checkpoint")) cfg.checkpoint = get_as<std::string>(doc, "checkpoint");
  if (has("context")) cfg.model.context = get_as<int>(doc, "context");
  if (has("embed_dim")) cfg.model.embed_dim = get_as<int>(doc, "embed_dim");
  if (has("hidden_dim")) cfg.model.hidden_dim = get_as<int>(doc, "hidden_dim");
  if (has("seed")) {
    cfg.model.seed = get_as<std::uint64_t>(doc, "seed");
    cfg.train.seed = cfg.model.seed;
  }

  const std::string rule = has("rule") ? get_as<std::string>(doc, "rule") : "logarithmic";
  const double alpha = has("alpha") ? get_as<double>(doc, "alpha") : 2.0;
  cfg.train.rule = ScoreRule::parse(rule, alpha);
  if (has("eps")) cfg.train.smoothing.eps = get_as<double>(doc, "eps");
  if (has("mask_enhanced")) {
    cfg.train.smoothing.mask_enhanced = get_as<bool>(doc, "mask_enhanced");
  }
  if (has("steps")) cfg.train.steps = get_as<std::int64_t>(doc, "steps");
  if (has("batch_size")) cfg.train.batch_size = get_as<std::size_t>(doc, "batch_size");
  if (has("learning_rate")) cfg.train.learning_rate = get_as<double>(doc, "learning_rate");
  if (has("beta1")) cfg.train.beta1 = get_as<double>(doc, "beta1");
  if (has("beta2")) cfg.train.beta2 = get_as<double>(doc, "beta2");
  if (has("adam_eps")) cfg.train.adam_eps = get_as<double>(doc, "adam_eps");
  if (has("warmup_steps")) cfg.train.warmup_steps = get_as<std::int64_t>(doc, "warmup_steps");
  if (has("eval_every")) cfg.train.eval_every = get_as<std::int64_t>(doc, "eval_every");

  if (has("beam_size")) cfg.beam.beam_size = get_as<int>(doc, "beam_size");
  if (has("max_len")) cfg.beam.max_len = get_as<int>(doc, "max_len");
  if (has("length_penalty")) cfg.beam.length_penalty = get_as<double>(doc, "length_penalty");
  if (has("objective")) {
    cfg.beam.objective = ScoreRule::parse(get_as<std::string>(doc, "objective"));
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfiguration,
                "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

}  // namespace scorelm::cli
