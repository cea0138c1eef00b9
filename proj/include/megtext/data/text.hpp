// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace megtext::data {

/// Lowercases ASCII letters, drops ASCII punctuation and collapses whitespace.
/// Non-ASCII bytes pass through untouched.
std::string normalize_text(std::string_view text);

/// Whitespace tokens of normalize_text(text).
std::vector<std::string> split_words(std::string_view text);

}  // namespace megtext::data
