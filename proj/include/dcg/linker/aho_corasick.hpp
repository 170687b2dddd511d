// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Aho-Corasick automaton over token sequences. Working on token ids rather
// than bytes makes every match start and end on a token boundary.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dcg::linker {

class TokenAutomaton {
 public:
  struct Match {
    std::size_t start = 0;  // token offsets, end exclusive
    std::size_t end = 0;
    std::uint32_t pattern = 0;
    friend auto operator<=>(const Match&, const Match&) = default;
  };

  // Returns the pattern index. Inserting an existing sequence returns the
  // original index.
  std::uint32_t add(std::span<const std::string> tokens);
  void build();

  std::size_t pattern_count() const { return pattern_lengths_.size(); }

  // All occurrences of all patterns, ordered by end then by length desc.
  std::vector<Match> find_all(std::span<const std::string> text) const;

 private:
  struct Node {
    std::vector<std::pair<std::int32_t, std::int32_t>> next;  // sorted (symbol, node)
    std::int32_t fail = 0;
    std::int32_t dict = -1;     // nearest proper suffix node that ends a pattern
    std::int32_t pattern = -1;  // pattern ending exactly here
    std::uint32_t depth = 0;
  };

  std::int32_t child(std::int32_t node, std::int32_t sym) const;
  std::int32_t symbol(const std::string& tok) const;

  std::vector<Node> nodes_{Node{}};
  std::unordered_map<std::string, std::int32_t> symbols_;
  std::vector<std::uint32_t> pattern_lengths_;
  bool built_ = false;
};

}  // namespace dcg::linker
