// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scorelm/decode.hpp"
#include "scorelm/model.hpp"
#include "scorelm/train.hpp"

namespace scorelm::cli {

// A run is fully described by one flat JSON document; see README for the
// list of keys. Unknown keys are rejected so typos cannot silently fall back
// to defaults. vocab_size is never configured; it comes from the data.
struct RunConfig {
  std::string corpus;  // plain UTF-8 text
  std::string pairs;   // JSON-lines with "source" and "target"
  std::string metrics = "metrics.jsonl";
  std::string checkpoint = "checkpoint.json";
  ModelConfig model;
  TrainConfig train;
  BeamConfig beam;
};

RunConfig default_run_config();

// Applies every key of `doc` on top of the defaults.
RunConfig parse_run_config(const nlohmann::json& doc);

RunConfig load_run_config(const std::string& path);

// Every key accepted by parse_run_config.
const std::vector<std::string>& config_keys();

}  // namespace scorelm::cli
