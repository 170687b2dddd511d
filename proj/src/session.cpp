// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/service/session.hpp"

#include <algorithm>
#include <cstdio>

#include "dcg/sparql/executor.hpp"
#include "dcg/sparql/query.hpp"
#include "dcg/data/interaction.hpp"

namespace dcg::service {

namespace {

using clock = std::chrono::steady_clock;

double elapsed_ms(clock::time_point a, clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

}  // namespace

NeuralParser::NeuralParser(model::ParserModel model, std::string checkpoint_id)
    : model_(std::make_unique<model::ParserModel>(std::move(model))), id_(std::move(checkpoint_id)) {}

std::vector<model::OutputToken> NeuralParser::parse(std::span<const std::string> input,
                                                    const graph::ContextSubgraph& sg, ParseTimings* timings) const {
  auto t0 = clock::now();
  auto ids = model::encode_tokens(model_->text_vocab(), input);
  auto g = model::graph_input(sg, model_->text_vocab());
  auto t1 = clock::now();
  auto out = model_->parse(ids, g);
  if (timings) {
    timings->encode_ms = elapsed_ms(t0, t1);
    timings->decode_ms = elapsed_ms(t1, clock::now());
  }
  return out;
}

nlohmann::json to_json(const TurnRecord& r, const kg::KnowledgeGraph& g) {
  nlohmann::json j;
  j["utterance"] = r.utterance;
  j["sparql"] = r.sparql;
  if (r.answer) {
    auto a = data::answer_to_json(*r.answer);
    if (r.answer->kind == sparql::AnswerKind::entity_set) {
      nlohmann::json labels = nlohmann::json::array();
      for (const auto& id : r.answer->entities) {
        auto t = g.find(id);
        labels.push_back(t ? g.label(*t) : id);
      }
      a["labels"] = std::move(labels);
    }
    j["answer"] = std::move(a);
    j["unexecutable"] = false;
  } else {
    j["answer"] = nullptr;
    j["unexecutable"] = true;
    j["execution_error"] = r.execution_error;
  }
  j["subgraph"] = r.subgraph;
  nlohmann::json linked = nlohmann::json::array();
  for (const auto& l : r.linked) linked.push_back({{"surface", l.surface}, {"id", l.id}, {"label", l.label}});
  j["linked_entities"] = std::move(linked);
  j["timings_ms"] = r.timings_ms;
  return j;
}

Pipeline::Pipeline(pipeline::KgResources res, const SemanticParser& parser, PipelineConfig cfg)
    : res_(res), parser_(parser), cfg_(std::move(cfg)) {}

TurnRecord Pipeline::step(Session& s, std::string_view utterance) const {
  if (blank(utterance)) throw EmptyUtterance();
  std::lock_guard lock(s.mu);
  TurnRecord rec;
  rec.utterance = std::string(utterance);
  auto prepared = pipeline::prepare_turn(res_, s.context, utterance, cfg_.turn);
  rec.linked = prepared.linked;
  rec.timings_ms["link"] = prepared.link_ms;
  rec.timings_ms["build"] = prepared.build_ms;
  const auto& sg = prepared.graph.merged;
  rec.subgraph = graph::snapshot(sg);

  ParseTimings pt;
  auto tokens = parser_.parse(prepared.input, sg, &pt);
  rec.timings_ms["encode"] = pt.encode_ms;
  rec.timings_ms["decode"] = pt.decode_ms;
  rec.sparql = model::realize(tokens, parser_.syntax_vocab(), sg);

  auto t0 = clock::now();
  try {
    rec.answer = sparql::execute(*res_.graph, sparql::parse_sparql(rec.sparql));
  } catch (const std::exception& e) {
    rec.execution_error = e.what();
  }
  rec.timings_ms["execute"] = elapsed_ms(t0, clock::now());

  // Commit only after every fallible step succeeded.
  s.context.t_max = cfg_.t_max;
  s.context.advance(std::move(prepared.graph.current), std::move(prepared.tokens),
                    rec.answer ? *rec.answer : sparql::Answer::entity_set({}));
  s.transcript.push_back(rec);
  return rec;
}

SessionStore::SessionStore(std::size_t t_max, std::chrono::seconds idle_timeout)
    : t_max_(t_max), idle_(idle_timeout), rng_(std::random_device{}()) {}

std::shared_ptr<Session> SessionStore::create(clock::time_point now) {
  std::lock_guard lock(mu_);
  auto s = std::make_shared<Session>();
  do {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                  static_cast<unsigned long long>(rng_()));
    s->id = buf;
  } while (sessions_.contains(s->id));
  s->context.t_max = t_max_;
  s->last_used = now;
  sessions_.emplace(s->id, s);
  return s;
}

std::shared_ptr<Session> SessionStore::get(const std::string& id, clock::time_point now) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  if (now - it->second->last_used > idle_) {
    sessions_.erase(it);
    return nullptr;
  }
  it->second->last_used = now;
  return it->second;
}

std::size_t SessionStore::expire_idle(clock::time_point now) {
  std::lock_guard lock(mu_);
  return std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_used > idle_; });
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

}  // namespace dcg::service
