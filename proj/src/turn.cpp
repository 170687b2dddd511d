// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/pipeline/turn.hpp"

#include <algorithm>
#include <chrono>

#include "dcg/model/compose.hpp"
#include "dcg/text/tokenize.hpp"

namespace dcg::pipeline {

std::vector<LinkedEntity> link_entities(const KgResources& res, std::span<const std::string> tokens,
                                        std::size_t top_k) {
  static const linker::PopularityTable empty;
  const auto& pop = res.popularity ? *res.popularity : empty;
  std::vector<LinkedEntity> out;
  for (const auto& span : res.matcher->find_mentions(tokens, &pop)) {
    auto ids = top_k == 0 ? std::vector<std::string>{linker::disambiguate(span, pop)} : linker::top_k(span, pop, top_k);
    for (auto& id : ids) {
      auto t = res.graph->find(id);
      out.push_back({span.surface, id, t ? res.graph->label(*t) : id});
    }
  }
  return out;
}

PreparedTurn prepare_turn(const KgResources& res, const graph::TurnContext& ctx, std::string_view utterance,
                          const TurnOptions& opts) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double, std::milli>(b - a).count(); };
  PreparedTurn p;
  auto t0 = clock::now();
  p.tokens = text::tokenize(utterance);
  p.linked = link_entities(res, p.tokens, opts.top_k_entities);
  auto t1 = clock::now();
  p.link_ms = ms(t0, t1);
  std::vector<kg::TermId> terms;
  for (const auto& l : p.linked) {
    auto t = res.graph->find(l.id);
    if (t && std::find(terms.begin(), terms.end(), *t) == terms.end()) terms.push_back(*t);
  }
  p.graph = graph::build_turn_graph(*res.graph, ctx, p.tokens, terms, opts.graph);
  p.build_ms = ms(t1, clock::now());
  std::vector<std::string> answer;
  if (ctx.prev_answer) answer = model::answer_tokens(*ctx.prev_answer, *res.graph);
  p.input = model::compose_input(ctx.prev_utterance, answer, p.tokens, opts.max_input_len);
  return p;
}

}  // namespace dcg::pipeline
