// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Neural semantic parser: a small transformer utterance encoder, a GATv2
// graph encoder over the context subgraph, and a transformer decoder whose
// output alphabet is V_s followed by the subgraph nodes.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dcg/ad/ops.hpp"
#include "dcg/ad/params.hpp"
#include "dcg/graph/context_graph.hpp"
#include "dcg/model/vocab.hpp"

namespace dcg::model {

struct ModelConfig {
  std::size_t d_model = 128;
  std::size_t heads = 2;           // encoder / decoder attention heads
  std::size_t ff_dim = 256;
  std::size_t encoder_layers = 2;
  std::size_t gat_layers = 2;
  std::size_t gat_heads = 2;
  std::size_t decoder_layers = 2;
  std::size_t max_input_len = 128;
  std::size_t max_decode_len = 64;
  bool gat_residual = true;  // h <- h + GAT(h)
  double dropout = 0.1;  // applied only while training
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// One subgraph in vocabulary-id form.
struct GraphInput {
  std::vector<std::vector<std::uint32_t>> node_tokens;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (src, dst)
};

GraphInput graph_input(const graph::ContextSubgraph& sg, const Vocabulary& text);

// Several graphs stacked block-diagonally. Every node receives a self-loop,
// so each attention neighbourhood contains the node itself plus its
// in-neighbours.
struct GraphBatch {
  std::size_t nodes = 0;
  std::vector<std::size_t> offsets;  // first node of each graph; size = graphs + 1
  std::vector<std::uint32_t> token_ids;
  std::vector<std::uint32_t> token_node;
  std::vector<double> inv_token_count;  // per node
  std::vector<std::uint32_t> src;
  std::vector<std::uint32_t> dst;
};

GraphBatch batch_graphs(std::span<const GraphInput> graphs);

// Cross-attention keys/values of [Z ; H] per decoder layer.
struct DecoderMemory {
  std::vector<ad::Var> keys;
  std::vector<ad::Var> values;
};

class ParserModel {
 public:
  ParserModel(ModelConfig cfg, Vocabulary text, Vocabulary syntax);

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& text_vocab() const { return text_; }
  const Vocabulary& syntax_vocab() const { return syntax_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }
  std::uint32_t eoq() const { return eoq_; }

  // Dropout draws from `rng` until disabled; inference never enables it.
  void enable_dropout(std::mt19937_64* rng) { dropout_rng_ = rng; }
  void disable_dropout() { dropout_rng_ = nullptr; }
  bool dropout_enabled() const { return dropout_rng_ != nullptr && cfg_.dropout > 0.0; }
  std::uint32_t bos() const { return bos_; }

  // Z: (len x d_model).
  ad::Var encode_utterance(ad::Tape& t, std::span<const std::uint32_t> token_ids);
  // h0: mean of the label-token embeddings of every node.
  ad::Var init_nodes(ad::Tape& t, const GraphBatch& g);
  // One GATv2 layer; `alpha`, when given, receives the attention weights of
  // every head aligned with g.src / g.dst.
  ad::Var gat_layer(ad::Tape& t, std::size_t layer, ad::Var h, const GraphBatch& g,
                    std::vector<ad::Tensor>* alpha = nullptr);
  ad::Var encode_graph(ad::Tape& t, const GraphBatch& g, std::vector<std::vector<ad::Tensor>>* alpha = nullptr);

  DecoderMemory prepare_memory(ad::Tape& t, ad::Var z, ad::Var h);
  // Decoder states for every prefix position: (len x d_model).
  ad::Var decoder_states(ad::Tape& t, const DecoderMemory& mem, ad::Var h, std::span<const OutputToken> prefix);
  // Logits over V_s followed by the n nodes: (rows x (|V_s| + n)).
  ad::Var output_logits(ad::Tape& t, ad::Var states, ad::Var h);
  // Probability distribution for the next token after `prefix` (which must
  // start with <bos>): (1 x (|V_s| + n)).
  ad::Var decode_step(ad::Tape& t, const DecoderMemory& mem, ad::Var h, std::span<const OutputToken> prefix);

  // Mean token-level cross-entropy of `gold` (ending with <eoq>) under
  // teacher forcing.
  ad::Var sequence_loss(ad::Tape& t, ad::Var z, ad::Var h, std::span<const OutputToken> gold);

  // Full inference for one input; returns tokens without <bos>.
  std::vector<OutputToken> parse(std::span<const std::uint32_t> input_ids, const GraphInput& graph,
                                 std::size_t max_len = 0);

  void save(const std::filesystem::path& dir, const nlohmann::json& metadata = nlohmann::json::object()) const;
  static ParserModel load(const std::filesystem::path& dir);

 private:
  ad::Var linear(ad::Tape& t, ad::Var x, const std::string& w, const std::string& b = {});
  ad::Var norm(ad::Tape& t, ad::Var x, const std::string& prefix);
  ad::Var attention(ad::Tape& t, ad::Var q_in, ad::Var keys, ad::Var values, const std::string& prefix,
                    bool causal);
  ad::Var feed_forward(ad::Tape& t, ad::Var x, const std::string& prefix);
  ad::Var p(ad::Tape& t, const std::string& name) { return t.param(params_.at(name)); }
  ad::Tensor positions(std::size_t len) const;
  ad::Var dropout(ad::Tape& t, ad::Var x);

  ModelConfig cfg_;
  Vocabulary text_;
  Vocabulary syntax_;
  ad::ParamStore params_;
  std::uint32_t bos_ = 0;
  std::uint32_t eoq_ = 0;
  std::mt19937_64* dropout_rng_ = nullptr;
};

using StepLogits = std::function<ad::Tensor(std::span<const OutputToken> prefix)>;

// Greedy loop: takes the argmax of each step's logits (first |V_s| entries are
// syntax symbols, the rest nodes) until <eoq> or max_len tokens. The
// returned sequence excludes <bos> and includes <eoq> when emitted.
std::vector<OutputToken> greedy_decode(const StepLogits& step, std::size_t syntax_size, std::uint32_t bos,
                                       std::uint32_t eoq, std::size_t max_len);

}  // namespace dcg::model
