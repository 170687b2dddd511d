// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// The model-independent half of a turn: tokenize, link, build the context
// subgraph and compose the encoder input. Shared by preprocessing and the
// interactive service so both see identical inputs.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dcg/graph/context_graph.hpp"
#include "dcg/kg/knowledge_graph.hpp"
#include "dcg/linker/entity_linker.hpp"

namespace dcg::pipeline {

struct KgResources {
  const kg::KnowledgeGraph* graph = nullptr;
  const linker::EntityMatcher* matcher = nullptr;
  const linker::PopularityTable* popularity = nullptr;
};

struct TurnOptions {
  std::size_t top_k_entities = 0;  // 0: one disambiguated entity per mention
  graph::TurnGraphOptions graph;
  std::size_t max_input_len = 128;
};

struct LinkedEntity {
  std::string surface;
  std::string id;
  std::string label;
};

std::vector<LinkedEntity> link_entities(const KgResources& res, std::span<const std::string> tokens,
                                        std::size_t top_k);

struct PreparedTurn {
  std::vector<std::string> tokens;
  std::vector<LinkedEntity> linked;
  graph::TurnGraph graph;
  std::vector<std::string> input;  // composed encoder input
  double link_ms = 0.0;
  double build_ms = 0.0;
};

// Throws graph::MergedGraphTooLarge when the entity neighbourhoods alone
// exceed the node cap.
PreparedTurn prepare_turn(const KgResources& res, const graph::TurnContext& ctx, std::string_view utterance,
                          const TurnOptions& opts);

}  // namespace dcg::pipeline
