// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/model/compose.hpp"

#include <algorithm>

#include "dcg/model/vocab.hpp"
#include "dcg/text/tokenize.hpp"

namespace dcg::model {

std::vector<std::string> answer_tokens(const sparql::Answer& a, const kg::KnowledgeGraph& g) {
  std::vector<std::string> out;
  switch (a.kind) {
    case sparql::AnswerKind::boolean: out.push_back(a.truth ? "yes" : "no"); break;
    case sparql::AnswerKind::count: out.push_back(std::to_string(a.value)); break;
    case sparql::AnswerKind::entity_set: {
      std::size_t n = std::min(a.entities.size(), kAnswerLabelLimit);
      for (std::size_t i = 0; i < n; ++i) {
        if (i) out.push_back(",");
        auto t = g.find(a.entities[i]);
        auto toks = text::tokenize(t && g.labeled(*t) ? g.label(*t) : a.entities[i]);
        out.insert(out.end(), toks.begin(), toks.end());
      }
      break;
    }
  }
  return out;
}

std::vector<std::string> compose_input(std::span<const std::string> prev_utterance,
                                       std::span<const std::string> prev_answer,
                                       std::span<const std::string> current, std::size_t max_len) {
  std::size_t p0 = 0, a_end = prev_answer.size(), c0 = 0;
  if (max_len > 0) {
    std::size_t budget = max_len > 3 ? max_len - 3 : 0;
    std::size_t total = prev_utterance.size() + prev_answer.size() + current.size();
    std::size_t excess = total > budget ? total - budget : 0;
    std::size_t drop = std::min(excess, prev_utterance.size());
    p0 = drop;
    excess -= drop;
    drop = std::min(excess, prev_answer.size());
    a_end = prev_answer.size() - drop;
    excess -= drop;
    c0 = std::min(excess, current.size());
  }
  std::vector<std::string> out;
  out.push_back(kCls);
  out.insert(out.end(), prev_utterance.begin() + static_cast<std::ptrdiff_t>(p0), prev_utterance.end());
  out.push_back(kSep);
  out.insert(out.end(), prev_answer.begin(), prev_answer.begin() + static_cast<std::ptrdiff_t>(a_end));
  out.push_back(kSep);
  out.insert(out.end(), current.begin() + static_cast<std::ptrdiff_t>(c0), current.end());
  return out;
}

}  // namespace dcg::model
