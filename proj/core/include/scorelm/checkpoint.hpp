// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "scorelm/data.hpp"
#include "scorelm/model.hpp"
#include "scorelm/scores.hpp"

namespace scorelm {

inline constexpr int kCheckpointVersion = 1;

// Self-describing JSON checkpoint:
//   {"v": 1, "model": {...}, "rule": {"kind", "alpha"},
//    "smoothing": {"eps", "mask_enhanced"}, "step": n,
//    "vocab": [code points] | null, "tensors": {name: [[row], ...]}}
// Reals are written in shortest round-trip decimal form, so a save/load
// cycle reproduces every parameter bit for bit.
struct Checkpoint {
  ModelConfig model;
  ScoreRule rule = ScoreRule::logarithmic();
  SmoothingConfig smoothing;
  std::int64_t step = 0;
  std::optional<Vocab> vocab;
  Parameters params;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string checkpoint_to_string(const Checkpoint& ckpt);
// kMalformedDocument for unparsable or incomplete documents,
// kVersionMismatch for an unknown "v", kShapeMismatch for tensors that do not
// match the model section.
Checkpoint checkpoint_from_string(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Writes `contents` to `path`, replacing any existing file.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace scorelm
