// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Turn pipeline (link, build subgraph, encode, decode, execute, advance the
// window) and the in-memory session store behind the HTTP API.

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dcg/model/parser_model.hpp"
#include "dcg/pipeline/turn.hpp"
#include "dcg/sparql/answer.hpp"

namespace dcg::service {

struct ParseTimings {
  double encode_ms = 0.0;
  double decode_ms = 0.0;
};

// Anything that maps a composed input and a context subgraph to output
// tokens. Implementations must be safe to call concurrently.
class SemanticParser {
 public:
  virtual ~SemanticParser() = default;
  virtual std::vector<model::OutputToken> parse(std::span<const std::string> input,
                                                const graph::ContextSubgraph& sg, ParseTimings* timings) const = 0;
  virtual const model::Vocabulary& syntax_vocab() const = 0;
  virtual std::string checkpoint_id() const = 0;
};

class NeuralParser : public SemanticParser {
 public:
  NeuralParser(model::ParserModel model, std::string checkpoint_id);
  std::vector<model::OutputToken> parse(std::span<const std::string> input, const graph::ContextSubgraph& sg,
                                        ParseTimings* timings) const override;
  const model::Vocabulary& syntax_vocab() const override { return model_->syntax_vocab(); }
  std::string checkpoint_id() const override { return id_; }
  model::ParserModel& model() { return *model_; }

 private:
  // Inference never writes to the parameters.
  std::unique_ptr<model::ParserModel> model_;
  std::string id_;
};

struct TurnRecord {
  std::string utterance;
  std::string sparql;
  std::optional<sparql::Answer> answer;  // empty when the query is unexecutable
  std::string execution_error;
  nlohmann::json subgraph;
  std::vector<pipeline::LinkedEntity> linked;
  std::map<std::string, double> timings_ms;
};

// API payload of one turn. Answer labels are resolved against `g`.
nlohmann::json to_json(const TurnRecord& r, const kg::KnowledgeGraph& g);

struct Session {
  std::string id;
  graph::TurnContext context;
  std::vector<TurnRecord> transcript;
  std::chrono::steady_clock::time_point last_used;
  std::mutex mu;  // one logical worker per session
};

class EmptyUtterance : public std::invalid_argument {
 public:
  EmptyUtterance() : std::invalid_argument("empty utterance") {}
};

struct PipelineConfig {
  std::size_t t_max = 5;
  pipeline::TurnOptions turn;
};

class Pipeline {
 public:
  Pipeline(pipeline::KgResources res, const SemanticParser& parser, PipelineConfig cfg);

  // Runs one turn. On failure the session is left unchanged and the
  // exception propagates.
  TurnRecord step(Session& s, std::string_view utterance) const;

  const PipelineConfig& config() const { return cfg_; }
  const pipeline::KgResources& resources() const { return res_; }
  const SemanticParser& parser() const { return parser_; }

 private:
  pipeline::KgResources res_;
  const SemanticParser& parser_;
  PipelineConfig cfg_;
};

class SessionStore {
 public:
  using clock = std::chrono::steady_clock;
  explicit SessionStore(std::size_t t_max, std::chrono::seconds idle_timeout = std::chrono::minutes(30));

  std::shared_ptr<Session> create(clock::time_point now = clock::now());
  // Null when unknown or expired. Refreshes the idle timer.
  std::shared_ptr<Session> get(const std::string& id, clock::time_point now = clock::now());
  std::size_t expire_idle(clock::time_point now = clock::now());
  std::size_t size() const;

 private:
  std::size_t t_max_;
  std::chrono::seconds idle_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_;
};

}  // namespace dcg::service
