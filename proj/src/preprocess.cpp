// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/train/preprocess.hpp"

#include "dcg/sparql/query.hpp"
#include "dcg/text/tokenize.hpp"

namespace dcg::train {

std::vector<TrainExample> preprocess(std::span<const data::Interaction> corpus, const pipeline::KgResources& res,
                                     const PreprocessConfig& cfg, PreprocessStats* stats) {
  const auto syntax = model::default_syntax_vocab();
  std::vector<TrainExample> out;
  PreprocessStats st;
  for (const auto& it : corpus) {
    graph::TurnContext ctx;
    ctx.t_max = cfg.t_max;
    for (std::size_t i = 0; i < it.turns.size(); ++i) {
      const auto& turn = it.turns[i];
      TrainExample ex;
      ex.interaction_id = it.id;
      ex.turn_position = i + 1;
      ex.gold_sparql = turn.sparql;
      ex.gold_answer = turn.answer;
      ex.question_type = turn.question_type;
      ex.phenomena = turn.phenomena;
      graph::ContextSubgraph current;
      auto tokens = text::tokenize(turn.utterance);
      try {
        auto p = pipeline::prepare_turn(res, ctx, turn.utterance, cfg.turn);
        ex.input = std::move(p.input);
        ex.subgraph = std::move(p.graph.merged);
        current = std::move(p.graph.current);
        auto al = model::align_query(sparql::parse_sparql(turn.sparql), syntax, ex.subgraph);
        ex.gold = std::move(al.tokens);
        ex.reachable = al.reachable;
        ex.missing = std::move(al.missing);
      } catch (const graph::MergedGraphTooLarge& e) {
        ex.reachable = false;
        ex.missing = {e.what()};
        ++st.too_large;
      }
      if (!ex.reachable) ++st.unreachable;
      ++st.examples;
      out.push_back(std::move(ex));
      ctx.advance(std::move(current), std::move(tokens), turn.answer);
    }
  }
  if (stats) *stats = st;
  return out;
}

bool in_dev_split(const std::string& interaction_id, double dev_fraction) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : interaction_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return static_cast<double>(h % 10000) < dev_fraction * 10000.0;
}

}  // namespace dcg::train
