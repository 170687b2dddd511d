// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Teacher-forced training with token-level cross-entropy, AdamW, global-norm
// clipping, and model selection on dev exact match.

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcg/eval/metrics.hpp"
#include "dcg/model/parser_model.hpp"
#include "dcg/train/optimizer.hpp"
#include "dcg/train/preprocess.hpp"
#include "dcg/util/rng.hpp"

namespace dcg::train {

struct TrainConfig {
  AdamWConfig optimizer;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;  // epochs without dev EM improvement
  double clip_norm = 1.0;
  std::uint64_t seed = 1;
  double time_budget_seconds = 0.0;  // 0: unlimited
  std::size_t max_steps = 0;         // 0: unlimited
  std::filesystem::path metrics_log;  // JSONL, one record per epoch; empty: off
  std::function<void(const nlohmann::json&)> on_epoch;
  // Name augmentation: with probability `name_shuffle` per example and step,
  // the name tokens of the example are consistently replaced by other
  // distinct tokens from `name_pool`, in the utterance and in node labels
  // alike. The gold parse points at nodes, so it is unaffected; the model
  // is pushed to match mentions to labels instead of memorizing names.
  std::vector<std::uint32_t> name_pool;
  double name_shuffle = 0.5;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(std::size_t step, const std::string& example_id);
  std::size_t step() const { return step_; }
  const std::string& example_id() const { return example_; }

 private:
  std::size_t step_;
  std::string example_;
};

// Vocabulary ids and graph input of one example under a given model.
struct Featurized {
  std::vector<std::uint32_t> input_ids;
  model::GraphInput graph;
  std::vector<model::OutputToken> gold;
  std::string id;  // interaction id and turn, for diagnostics
};

Featurized featurize(const model::ParserModel& m, const TrainExample& ex);

// Ids of tokens that occur only in entity labels, and in at most
// `max_labels` of them: proper names rather than class cues such as "river".
std::vector<std::uint32_t> name_tokens(const kg::KnowledgeGraph& g, const model::Vocabulary& v,
                                       std::size_t max_labels = 3);

// `f` with its name tokens (members of `pool`) remapped injectively to
// random pool tokens.
Featurized shuffle_names(const Featurized& f, std::span<const std::uint32_t> pool, util::Rng& rng);

// Text vocabulary over example inputs and every KG label.
model::Vocabulary build_text_vocab(std::span<const TrainExample> examples, const kg::KnowledgeGraph& g);

// Mean of the per-example sequence losses; the graphs of the batch are
// encoded together as one block-diagonal graph.
ad::Var batch_loss(ad::Tape& t, model::ParserModel& m, std::span<const Featurized* const> batch);

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double train_loss = 0.0;
  std::optional<double> dev_em;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
  std::size_t steps = 0;
  std::size_t best_epoch = 0;
  std::optional<double> best_dev_em;
  std::size_t skipped_unreachable = 0;
};

// Trains on the reachable examples of `train_set`. When `dev_set` is
// non-empty the parameters with the best dev EM are restored at the end.
TrainResult train(model::ParserModel& m, std::span<const TrainExample> train_set,
                  std::span<const TrainExample> dev_set, const TrainConfig& cfg);

struct Prediction {
  std::string sparql;
  std::optional<sparql::Answer> answer;  // empty when not executable
  std::vector<model::OutputToken> tokens;
};

Prediction predict(model::ParserModel& m, const TrainExample& ex, const kg::KnowledgeGraph& g);

std::vector<eval::TurnScore> evaluate(model::ParserModel& m, std::span<const TrainExample> examples,
                                      const kg::KnowledgeGraph& g, std::vector<Prediction>* predictions = nullptr);

// EM over `examples` (unreachable ones count as wrong); no execution.
double exact_match_rate(model::ParserModel& m, std::span<const TrainExample> examples);

}  // namespace dcg::train
