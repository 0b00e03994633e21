// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include "scorelm/error.hpp"

namespace scorelm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kParameterDomain: return "parameter domain";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kUndefinedReference: return "undefined reference";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kSearchTooLarge: return "search space too large";
    case ErrorCode::kMalformedDocument: return "malformed document";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kIo: return "i/o";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace scorelm
