// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/checkpoint.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "scorelm/error.hpp"

namespace scorelm {
namespace {

using nlohmann::json;

json tensor_to_json(const Tensor& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < t.cols; ++c) row.push_back(t(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Tensor tensor_from_json(const json& rows, std::string_view name) {
  if (!rows.is_array() || rows.empty()) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor '" + std::string(name) + "' must be a non-empty array of rows");
  }
  Tensor t;
  t.rows = rows.size();
  t.cols = rows.front().is_array() ? rows.front().size() : 0;
  t.values.reserve(t.rows * t.cols);
  for (const json& row : rows) {
    if (!row.is_array() || row.size() != t.cols) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor '" + std::string(name) + "' has ragged rows");
    }
    for (const json& x : row) {
      if (!x.is_number()) {
        throw Error(ErrorCode::kMalformedDocument,
                    "tensor '" + std::string(name) + "' holds a non-numeric entry");
      }
      const double v = x.get<double>();
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kMalformedDocument,
                    "tensor '" + std::string(name) + "' holds a non-finite entry");
      }
      t.values.push_back(v);
    }
  }
  return t;
}

const json& require(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string("checkpoint is missing \"") + key + "\"");
  }
  return *it;
}

}  // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  json doc;
  doc["v"] = kCheckpointVersion;
  doc["model"] = {{"vocab_size", ckpt.model.vocab_size},
                  {"context", ckpt.model.context},
                  {"embed_dim", ckpt.model.embed_dim},
                  {"hidden_dim", ckpt.model.hidden_dim},
                  {"seed", ckpt.model.seed}};
  doc["rule"] = {{"kind", ckpt.rule.name()}, {"alpha", ckpt.rule.alpha()}};
  doc["smoothing"] = {{"eps", ckpt.smoothing.eps},
                      {"mask_enhanced", ckpt.smoothing.mask_enhanced}};
  doc["step"] = ckpt.step;
  if (ckpt.vocab) {
    json symbols = json::array();
    for (char32_t cp : ckpt.vocab->symbols()) {
      symbols.push_back(static_cast<std::uint32_t>(cp));
    }
    doc["vocab"] = std::move(symbols);
  } else {
    doc["vocab"] = nullptr;
  }
  json tensors = json::object();
  const auto ts = ckpt.params.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tensors[std::string(Parameters::kNames[i])] = tensor_to_json(*ts[i]);
  }
  doc["tensors"] = std::move(tensors);
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedDocument, "checkpoint must be a JSON object");
  }
  const json& version = require(doc, "v");
  if (!version.is_number_integer()) {
    throw Error(ErrorCode::kMalformedDocument, "checkpoint \"v\" must be an integer");
  }
  if (version.get<int>() != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported checkpoint version " + version.dump() +
                    " (supported versions: 1)");
  }

  Checkpoint ckpt;
  try {
    const json& model = require(doc, "model");
    ckpt.model.vocab_size = require(model, "vocab_size").get<int>();
    ckpt.model.context = require(model, "context").get<int>();
    ckpt.model.embed_dim = require(model, "embed_dim").get<int>();
    ckpt.model.hidden_dim = require(model, "hidden_dim").get<int>();
    ckpt.model.seed = require(model, "seed").get<std::uint64_t>();

    const json& rule = require(doc, "rule");
    ckpt.rule = ScoreRule::parse(require(rule, "kind").get<std::string>(),
                                 require(rule, "alpha").get<double>());
    const json& smoothing = require(doc, "smoothing");
    ckpt.smoothing.eps = require(smoothing, "eps").get<double>();
    ckpt.smoothing.mask_enhanced = require(smoothing, "mask_enhanced").get<bool>();
    ckpt.step = require(doc, "step").get<std::int64_t>();

    const json& vocab = require(doc, "vocab");
    if (!vocab.is_null()) {
      std::vector<char32_t> symbols;
      for (const json& cp : vocab) symbols.push_back(static_cast<char32_t>(cp.get<std::uint32_t>()));
      ckpt.vocab = Vocab(std::move(symbols));
    }

    const json& tensors = require(doc, "tensors");
    auto ts = ckpt.params.tensors();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string name(Parameters::kNames[i]);
      *ts[i] = tensor_from_json(require(tensors, name.c_str()), name);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string("checkpoint field has the wrong type: ") + e.what());
  }

  try {
    ckpt.model.validate();
    ckpt.smoothing.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  ckpt.params.check_shapes(ckpt.model);
  if (ckpt.vocab && ckpt.vocab->size() != ckpt.model.vocab_size) {
    throw Error(ErrorCode::kShapeMismatch,
                "vocabulary has " + std::to_string(ckpt.vocab->size()) +
                    " ids but the model expects " +
                    std::to_string(ckpt.model.vocab_size));
  }
  return ckpt;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text_file(path, checkpoint_to_string(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_string(read_text_file(path));
}

}  // namespace scorelm
