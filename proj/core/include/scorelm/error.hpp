// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scorelm {

enum class ErrorCode {
  kInvalidInput,
  kParameterDomain,
  kConfiguration,
  kUndefinedReference,
  kNonFinite,
  kSearchTooLarge,
  kMalformedDocument,
  kVersionMismatch,
  kShapeMismatch,
  kIo,
  kInternal,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scorelm
