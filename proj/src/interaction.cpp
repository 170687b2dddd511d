// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/data/interaction.hpp"

#include <fstream>
#include <stdexcept>

namespace dcg::data {

using nlohmann::json;

json answer_to_json(const sparql::Answer& a) {
  json j;
  j["kind"] = sparql::to_string(a.kind);
  switch (a.kind) {
    case sparql::AnswerKind::entity_set: j["entities"] = a.entities; break;
    case sparql::AnswerKind::boolean: j["truth"] = a.truth; break;
    case sparql::AnswerKind::count: j["value"] = a.value; break;
  }
  return j;
}

sparql::Answer answer_from_json(const json& j) {
  auto kind = sparql::answer_kind_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case sparql::AnswerKind::entity_set:
      return sparql::Answer::entity_set(j.at("entities").get<std::vector<std::string>>());
    case sparql::AnswerKind::boolean: return sparql::Answer::boolean(j.at("truth").get<bool>());
    case sparql::AnswerKind::count: return sparql::Answer::count(j.at("value").get<std::uint64_t>());
  }
  return {};
}

json to_json(const Interaction& it) {
  json turns = json::array();
  for (const auto& t : it.turns) {
    json jt;
    jt["utterance"] = t.utterance;
    jt["sparql"] = t.sparql;
    jt["answer"] = answer_to_json(t.answer);
    if (!t.question_type.empty()) jt["question_type"] = t.question_type;
    if (!t.phenomena.empty()) jt["phenomena"] = t.phenomena;
    if (t.coref_distance != 0) jt["coref_distance"] = t.coref_distance;
    turns.push_back(std::move(jt));
  }
  return json{{"id", it.id}, {"turns", std::move(turns)}};
}

Interaction interaction_from_json(const json& j) {
  Interaction it;
  it.id = j.at("id").get<std::string>();
  for (const auto& jt : j.at("turns")) {
    Turn t;
    t.utterance = jt.at("utterance").get<std::string>();
    t.sparql = jt.at("sparql").get<std::string>();
    t.answer = answer_from_json(jt.at("answer"));
    t.question_type = jt.value("question_type", "");
    t.phenomena = jt.value("phenomena", std::vector<std::string>{});
    t.coref_distance = jt.value("coref_distance", 0);
    it.turns.push_back(std::move(t));
  }
  return it;
}

void write_corpus(const std::filesystem::path& file, const std::vector<Interaction>& corpus) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (const auto& it : corpus) out << to_json(it).dump() << '\n';
}

std::vector<Interaction> read_corpus(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open corpus " + file.string());
  std::vector<Interaction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(interaction_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dcg::data
