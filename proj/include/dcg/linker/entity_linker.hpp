// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcg/data/interaction.hpp"
#include "dcg/kg/knowledge_graph.hpp"
#include "dcg/linker/aho_corasick.hpp"

namespace dcg::linker {

// Gold-parse frequency of each entity; a missing key counts as zero.
class PopularityTable {
 public:
  std::uint64_t count(const std::string& id) const;
  void add(const std::string& id, std::uint64_t n = 1) { counts_[id] += n; }
  const std::unordered_map<std::string, std::uint64_t>& counts() const { return counts_; }

  void save(const std::filesystem::path& file) const;
  static PopularityTable load(const std::filesystem::path& file);

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
};

// counts[e] = number of gold parses (across all turns) that mention e.
PopularityTable build_popularity(std::span<const data::Interaction> training);

struct MentionSpan {
  std::size_t start = 0;  // token offsets, end exclusive
  std::size_t end = 0;
  std::string surface;
  std::vector<std::string> candidates;  // popularity desc, then id asc
};

// Multi-pattern matcher over the lowercased labels of entity-kind elements
// (types and relations are not linkable mentions).
class EntityMatcher {
 public:
  EntityMatcher() { automaton_.build(); }
  explicit EntityMatcher(const kg::KnowledgeGraph& g);

  // Every label occurrence, overlapping ones included.
  std::vector<TokenAutomaton::Match> all_matches(std::span<const std::string> tokens) const {
    return automaton_.find_all(tokens);
  }

  // Leftmost-longest non-overlapping spans. Candidates are ordered by `pop`
  // when given, otherwise by id.
  std::vector<MentionSpan> find_mentions(std::span<const std::string> tokens,
                                         const PopularityTable* pop = nullptr) const;

  std::size_t label_count() const { return entities_.size(); }

 private:
  TokenAutomaton automaton_;
  std::vector<std::vector<std::string>> entities_;  // per pattern index
};

EntityMatcher build_lexicon(const kg::KnowledgeGraph& g);

// Leftmost-longest selection over an arbitrary match list.
std::vector<TokenAutomaton::Match> leftmost_longest(std::vector<TokenAutomaton::Match> matches);

std::string disambiguate(const MentionSpan& span, const PopularityTable& pop);

// The k most popular candidates (ties by id); k = 0 keeps all.
std::vector<std::string> top_k(const MentionSpan& span, const PopularityTable& pop, std::size_t k);

}  // namespace dcg::linker
