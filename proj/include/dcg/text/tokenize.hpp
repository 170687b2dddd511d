// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dcg::text {

// Lowercases ASCII and splits on whitespace and punctuation. Punctuation
// characters are kept as single-character tokens. Bytes >= 0x80 are treated
// as word characters so UTF-8 names survive intact.
std::vector<std::string> tokenize(std::string_view s);

std::string to_lower(std::string_view s);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

bool is_punct_token(std::string_view tok);

// Fixed 50-word English stopword list used by the type-link pruning rule.
bool is_stopword(std::string_view tok);

// Tokens of `s` with punctuation and stopwords removed.
std::vector<std::string> content_tokens(std::string_view s);

}  // namespace dcg::text
