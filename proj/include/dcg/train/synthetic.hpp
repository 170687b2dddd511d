// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Seeded generator for a small knowledge graph and templated multi-turn
// interactions with gold SPARQL and executed gold answers.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dcg/data/interaction.hpp"
#include "dcg/kg/knowledge_graph.hpp"

namespace dcg::train {

inline constexpr const char* kInstanceOf = "P31";

namespace qtype {
inline constexpr const char* kDirect = "Simple Question (Direct)";
inline constexpr const char* kCoref = "Simple Question (Coref)";
inline constexpr const char* kEllipsis = "Simple Question (Ellipsis)";
inline constexpr const char* kVerification = "Verification (Boolean)";
inline constexpr const char* kUnion = "Logical Reasoning (Union)";
inline constexpr const char* kCount = "Quantitative Reasoning (Count)";
}  // namespace qtype

struct SyntheticConfig {
  std::uint64_t seed = 7;
  std::size_t interactions = 200;
  std::size_t heldout_interactions = 50;
  std::size_t min_turns = 4;
  std::size_t max_turns = 6;
  // Multiplies the per-class entity counts (about 200 entities at 1.0).
  double entity_scale = 1.0;
  std::size_t ambiguous_labels = 4;
};

struct SyntheticCorpus {
  kg::KnowledgeGraph graph;
  std::vector<data::Interaction> train;
  std::vector<data::Interaction> heldout;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& cfg);

// Writes kg_triples.tsv, kg_labels.tsv, train.jsonl and heldout.jsonl.
void write_synthetic_corpus(const SyntheticCorpus& c, const std::filesystem::path& dir);

}  // namespace dcg::train
