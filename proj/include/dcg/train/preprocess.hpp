// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <string>
#include <vector>

#include "dcg/data/interaction.hpp"
#include "dcg/model/vocab.hpp"
#include "dcg/pipeline/turn.hpp"

namespace dcg::train {

struct PreprocessConfig {
  std::size_t t_max = 5;
  pipeline::TurnOptions turn;
};

struct TrainExample {
  std::string interaction_id;
  std::size_t turn_position = 0;  // 1-based
  std::vector<std::string> input;
  graph::ContextSubgraph subgraph;
  std::vector<model::OutputToken> gold;  // ends with <eoq>; partial when unreachable
  bool reachable = true;
  std::vector<std::string> missing;
  std::string gold_sparql;
  sparql::Answer gold_answer;
  std::string question_type;
  std::vector<std::string> phenomena;
};

struct PreprocessStats {
  std::size_t examples = 0;
  std::size_t unreachable = 0;
  std::size_t too_large = 0;
};

// Replays every interaction with gold answers as the previous answer. Turns
// whose gold parse cannot be aligned to Ĝ_t are kept and tagged unreachable.
std::vector<TrainExample> preprocess(std::span<const data::Interaction> corpus, const pipeline::KgResources& res,
                                     const PreprocessConfig& cfg, PreprocessStats* stats = nullptr);

// Stable FNV-1a split: true when the interaction belongs to the dev split.
bool in_dev_split(const std::string& interaction_id, double dev_fraction = 0.1);

}  // namespace dcg::train
