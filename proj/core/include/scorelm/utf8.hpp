// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace scorelm::utf8 {

// Strict decoding: rejects overlong forms, surrogates and truncated
// sequences with Error(kInvalidInput) naming the byte offset.
std::u32string decode(std::string_view bytes);

std::string encode(char32_t code_point);
std::string encode(std::u32string_view code_points);

}  // namespace scorelm::utf8
