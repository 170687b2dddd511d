// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Exact match, set F1 and answer accuracy, plus sliced aggregation.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dcg/sparql/answer.hpp"

namespace dcg::eval {

// 1 iff canonical serializations agree; when either side does not parse the
// whitespace-normalized raw strings are compared.
int exact_match(std::string_view pred, std::string_view gold);

struct Scored {
  double score = 0.0;
  bool kind_mismatch = false;
};

// Both empty -> 1, exactly one empty -> 0.
Scored set_f1(const sparql::Answer& pred, const sparql::Answer& gold);
Scored answer_accuracy(const sparql::Answer& pred, const sparql::Answer& gold);

struct TurnScore {
  int em = 0;
  std::optional<double> f1;        // entity-set gold answers
  std::optional<double> accuracy;  // boolean / count gold answers
  bool kind_mismatch = false;
  bool unexecutable = false;
  bool unreachable = false;
  std::string question_type;
  std::size_t turn_position = 0;
  std::vector<std::string> phenomena;
};

// `pred_answer` is empty when the prediction could not be executed.
TurnScore score_turn(std::string_view pred_sparql, const std::optional<sparql::Answer>& pred_answer,
                     std::string_view gold_sparql, const sparql::Answer& gold_answer);

struct SliceRow {
  std::size_t count = 0;
  double em = 0.0;
  std::optional<double> f1;
  std::optional<double> accuracy;
};

struct Report {
  std::size_t turns = 0;
  std::map<std::string, SliceRow> by_type;  // micro within a type
  // Macro averages over question types.
  double overall_em = 0.0;
  std::optional<double> overall_f1;
  std::optional<double> overall_accuracy;
  double micro_em = 0.0;
  std::map<std::size_t, SliceRow> by_turn_position;
  std::map<std::string, SliceRow> by_phenomenon;
  double unexecutable_rate = 0.0;
  std::size_t unreachable = 0;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

Report aggregate(std::span<const TurnScore> scores);

}  // namespace dcg::eval
