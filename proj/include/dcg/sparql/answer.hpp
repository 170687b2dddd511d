// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dcg::sparql {

enum class AnswerKind { entity_set, boolean, count };

std::string_view to_string(AnswerKind k);
AnswerKind answer_kind_from_string(std::string_view s);

// Only the field matching `kind` is meaningful. `entities` is kept sorted and
// duplicate-free.
struct Answer {
  AnswerKind kind = AnswerKind::entity_set;
  std::vector<std::string> entities;
  bool truth = false;
  std::uint64_t value = 0;

  static Answer entity_set(std::vector<std::string> ids);
  static Answer boolean(bool b);
  static Answer count(std::uint64_t n);

  friend bool operator==(const Answer&, const Answer&) = default;
};

}  // namespace dcg::sparql
