// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/text/tokenize.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace dcg::text {

namespace {

bool is_word_byte(unsigned char c) {
  return c >= 0x80 || std::isalnum(c) || c == '_' || c == '\'';
}

constexpr std::array<std::string_view, 50> kStopwords = {
    "a",     "an",   "the",   "of",    "in",    "on",   "at",   "to",   "for",   "by",
    "with",  "from", "and",   "or",    "is",    "are",  "was",  "were", "be",    "been",
    "do",    "does", "did",   "has",   "have",  "had",  "who",  "whom", "what",  "which",
    "where", "when", "how",   "many",  "that",  "this", "these", "those", "it",  "its",
    "as",    "me",   "you",   "tell",  "about", "there", "their", "his", "her",  "much"};

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(to_lower(cur));
      cur.clear();
    }
  };
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (is_word_byte(u)) {
      cur.push_back(c);
    } else if (std::isspace(u)) {
      flush();
    } else {
      flush();
      out.emplace_back(1, c);
    }
  }
  flush();
  return out;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

bool is_punct_token(std::string_view tok) {
  return tok.size() == 1 && !is_word_byte(static_cast<unsigned char>(tok[0]));
}

bool is_stopword(std::string_view tok) {
  return std::find(kStopwords.begin(), kStopwords.end(), tok) != kStopwords.end();
}

std::vector<std::string> content_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) {
    if (!is_punct_token(t) && !is_stopword(t)) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace dcg::text
