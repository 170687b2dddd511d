// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcg/kg/knowledge_graph.hpp"
#include "dcg/sparql/answer.hpp"

namespace dcg::model {

inline constexpr std::size_t kAnswerLabelLimit = 10;

// Entity sets become comma-separated labels (first 10 by id), booleans
// "yes"/"no", counts their decimal digits. Unknown ids render as the id.
std::vector<std::string> answer_tokens(const sparql::Answer& a, const kg::KnowledgeGraph& g);

// [CLS] prev [SEP] answer [SEP] current. When the result exceeds max_len,
// tokens are dropped oldest first: previous utterance, then answer, then
// the front of the current utterance. The three markers are always kept.
std::vector<std::string> compose_input(std::span<const std::string> prev_utterance,
                                       std::span<const std::string> prev_answer,
                                       std::span<const std::string> current, std::size_t max_len = 0);

}  // namespace dcg::model
