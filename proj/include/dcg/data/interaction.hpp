// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcg/sparql/answer.hpp"

namespace dcg::data {

struct Turn {
  std::string utterance;
  std::string sparql;
  sparql::Answer answer;
  // Generator metadata; empty / zero on external corpora.
  std::string question_type;
  std::vector<std::string> phenomena;  // coref=-1, coref<-1, ellipsis, multi-entity
  int coref_distance = 0;
};

struct Interaction {
  std::string id;
  std::vector<Turn> turns;
};

nlohmann::json answer_to_json(const sparql::Answer& a);
sparql::Answer answer_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Interaction& it);
Interaction interaction_from_json(const nlohmann::json& j);

// One interaction per line.
void write_corpus(const std::filesystem::path& file, const std::vector<Interaction>& corpus);
std::vector<Interaction> read_corpus(const std::filesystem::path& file);

}  // namespace dcg::data
