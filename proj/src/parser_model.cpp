// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/model/parser_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace dcg::model {

using ad::Tape;
using ad::Tensor;
using ad::Var;

nlohmann::json ModelConfig::to_json() const {
  return {{"d_model", d_model},         {"heads", heads},
          {"ff_dim", ff_dim},           {"encoder_layers", encoder_layers},
          {"gat_layers", gat_layers},   {"gat_heads", gat_heads},
          {"decoder_layers", decoder_layers}, {"max_input_len", max_input_len},
          {"max_decode_len", max_decode_len}, {"gat_residual", gat_residual}, {"dropout", dropout}, {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.heads = j.value("heads", c.heads);
  c.ff_dim = j.value("ff_dim", c.ff_dim);
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.gat_layers = j.value("gat_layers", c.gat_layers);
  c.gat_heads = j.value("gat_heads", c.gat_heads);
  c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
  c.max_input_len = j.value("max_input_len", c.max_input_len);
  c.max_decode_len = j.value("max_decode_len", c.max_decode_len);
  c.dropout = j.value("dropout", c.dropout);
  c.gat_residual = j.value("gat_residual", c.gat_residual);
  c.seed = j.value("seed", c.seed);
  return c;
}

GraphInput graph_input(const graph::ContextSubgraph& sg, const Vocabulary& text) {
  GraphInput in;
  const auto unk = *text.find(kUnk);
  in.node_tokens.reserve(sg.size());
  for (const auto& n : sg.nodes()) {
    auto ids = encode_tokens(text, n.label_tokens);
    if (ids.empty()) ids.push_back(unk);
    in.node_tokens.push_back(std::move(ids));
  }
  in.edges.assign(sg.edges().begin(), sg.edges().end());
  return in;
}

GraphBatch batch_graphs(std::span<const GraphInput> graphs) {
  GraphBatch b;
  b.offsets.push_back(0);
  for (const auto& g : graphs) {
    const auto base = static_cast<std::uint32_t>(b.nodes);
    const auto n = static_cast<std::uint32_t>(g.node_tokens.size());
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto& toks = g.node_tokens[i];
      for (auto t : toks) {
        b.token_ids.push_back(t);
        b.token_node.push_back(base + i);
      }
      b.inv_token_count.push_back(toks.empty() ? 0.0 : 1.0 / static_cast<double>(toks.size()));
      b.src.push_back(base + i);
      b.dst.push_back(base + i);
    }
    for (auto [s, d] : g.edges) {
      if (s >= n || d >= n) throw std::out_of_range("batch_graphs: edge endpoint out of range");
      if (s == d) continue;  // already present as the self-loop
      b.src.push_back(base + s);
      b.dst.push_back(base + d);
    }
    b.nodes += n;
    b.offsets.push_back(b.nodes);
  }
  return b;
}

namespace {

std::string layer_name(const char* block, std::size_t l) { return std::string(block) + "." + std::to_string(l); }

}  // namespace

ParserModel::ParserModel(ModelConfig cfg, Vocabulary text, Vocabulary syntax)
    : cfg_(cfg), text_(std::move(text)), syntax_(std::move(syntax)) {
  const auto d = cfg_.d_model;
  if (d == 0 || cfg_.heads == 0 || d % cfg_.heads != 0 || cfg_.gat_heads == 0 || d % cfg_.gat_heads != 0) {
    throw std::invalid_argument("d_model must be a positive multiple of the head counts");
  }
  if (!text_.find(kUnk)) throw std::invalid_argument("text vocabulary lacks " + std::string(kUnk));
  auto b = syntax_.find(kBos);
  auto e = syntax_.find(kEoq);
  if (!b || !e) throw std::invalid_argument("syntax vocabulary must contain <bos> and <eoq>");
  bos_ = *b;
  eoq_ = *e;

  std::mt19937_64 rng(cfg_.seed);
  auto lin = [&](const std::string& name, std::size_t in, std::size_t out, bool bias) {
    params_.create(name + ".w", ad::xavier(in, out, rng));
    if (bias) params_.create(name + ".b", Tensor(1, out));
  };
  auto ln = [&](const std::string& name) {
    params_.create(name + ".g", Tensor(1, d, 1.0));
    params_.create(name + ".b", Tensor(1, d));
  };
  auto attn = [&](const std::string& name) {
    lin(name + ".q", d, d, false);
    lin(name + ".k", d, d, false);
    lin(name + ".v", d, d, false);
    lin(name + ".o", d, d, true);
  };
  auto ff = [&](const std::string& name) {
    lin(name + ".ff1", d, cfg_.ff_dim, true);
    lin(name + ".ff2", cfg_.ff_dim, d, true);
  };

  params_.create("emb.text", ad::normal(text_.size(), d, 1.0, rng));
  for (std::size_t l = 0; l < cfg_.encoder_layers; ++l) {
    auto n = layer_name("enc", l);
    ln(n + ".ln1");
    attn(n + ".self");
    ln(n + ".ln2");
    ff(n);
  }
  ln("enc.ln");

  const auto dh = d / cfg_.gat_heads;
  for (std::size_t l = 0; l < cfg_.gat_layers; ++l) {
    auto n = layer_name("gat", l);
    for (std::size_t h = 0; h < cfg_.gat_heads; ++h) {
      auto hn = n + ".h" + std::to_string(h);
      params_.create(hn + ".w_target", ad::xavier(d, dh, rng));
      params_.create(hn + ".w_source", ad::xavier(d, dh, rng));
      params_.create(hn + ".attn", ad::xavier(dh, 1, rng));
    }
    params_.create(n + ".b", Tensor(1, d));
  }

  params_.create("emb.syntax", ad::normal(syntax_.size(), d, 1.0, rng));
  for (std::size_t l = 0; l < cfg_.decoder_layers; ++l) {
    auto n = layer_name("dec", l);
    ln(n + ".ln1");
    attn(n + ".self");
    ln(n + ".ln2");
    attn(n + ".cross");
    ln(n + ".ln3");
    ff(n);
  }
  ln("dec.ln");
  params_.create("out.w1", ad::xavier(d, syntax_.size(), rng));

  // Cross-attention value/output maps start near the identity, so node
  // logits H s begin as overlap between attended tokens and node labels
  // (both live in emb.text). Without this the pointer rarely learns to tell
  // two same-class entities apart.
  for (std::size_t l = 0; l < cfg_.decoder_layers; ++l) {
    auto n = layer_name("dec", l);
    for (const char* w : {".cross.v.w", ".cross.o.w"}) {
      auto& t = params_.at(n + w).value;
      for (std::size_t i = 0; i < d; ++i) t.at(i, i) += 1.0;
    }
  }
}

Var ParserModel::linear(Tape& t, Var x, const std::string& w, const std::string& b) {
  auto y = ad::matmul(x, p(t, w));
  return b.empty() ? y : ad::add_bias(y, p(t, b));
}

Var ParserModel::norm(Tape& t, Var x, const std::string& prefix) {
  return ad::layer_norm(x, p(t, prefix + ".g"), p(t, prefix + ".b"));
}

Var ParserModel::attention(Tape& t, Var q_in, Var keys, Var values, const std::string& prefix, bool causal) {
  const auto d = cfg_.d_model;
  const auto dh = d / cfg_.heads;
  auto q = linear(t, q_in, prefix + ".q.w");
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor mask;
  if (causal) {
    mask = Tensor(q.rows(), keys.rows());
    for (std::size_t i = 0; i < q.rows(); ++i)
      for (std::size_t j = i + 1; j < keys.rows(); ++j) mask.at(i, j) = -1e30;
  }
  std::vector<Var> heads;
  heads.reserve(cfg_.heads);
  for (std::size_t h = 0; h < cfg_.heads; ++h) {
    auto qh = ad::slice_cols(q, h * dh, (h + 1) * dh);
    auto kh = ad::slice_cols(keys, h * dh, (h + 1) * dh);
    auto vh = ad::slice_cols(values, h * dh, (h + 1) * dh);
    auto s = ad::scale(ad::matmul_nt(qh, kh), inv);
    if (causal) s = ad::add_const(s, mask);
    heads.push_back(ad::matmul(ad::softmax_rows(s), vh));
  }
  auto cat = cfg_.heads == 1 ? heads[0] : ad::concat_cols(heads);
  return linear(t, cat, prefix + ".o.w", prefix + ".o.b");
}

Var ParserModel::feed_forward(Tape& t, Var x, const std::string& prefix) {
  auto h = ad::relu(linear(t, x, prefix + ".ff1.w", prefix + ".ff1.b"));
  return linear(t, h, prefix + ".ff2.w", prefix + ".ff2.b");
}

Tensor ParserModel::positions(std::size_t len) const {
  const auto d = cfg_.d_model;
  Tensor pe(len, d);
  for (std::size_t pos = 0; pos < len; ++pos) {
    for (std::size_t i = 0; i < d; i += 2) {
      double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      pe.at(pos, i) = std::sin(static_cast<double>(pos) * freq);
      if (i + 1 < d) pe.at(pos, i + 1) = std::cos(static_cast<double>(pos) * freq);
    }
  }
  return pe;
}

Var ParserModel::dropout(Tape& t, Var x) {
  if (!dropout_enabled()) return x;
  const double keep = 1.0 - cfg_.dropout;
  std::bernoulli_distribution coin(keep);
  Tensor mask(x.rows(), x.cols());
  for (auto& v : mask.data) v = coin(*dropout_rng_) ? 1.0 / keep : 0.0;
  return ad::mul(x, t.constant(std::move(mask)));
}

Var ParserModel::encode_utterance(Tape& t, std::span<const std::uint32_t> token_ids) {
  if (token_ids.empty()) throw std::invalid_argument("encode_utterance: empty input");
  auto x = ad::gather_rows(p(t, "emb.text"), token_ids);
  x = dropout(t, ad::add_const(x, positions(token_ids.size())));
  for (std::size_t l = 0; l < cfg_.encoder_layers; ++l) {
    auto n = layer_name("enc", l);
    auto a = norm(t, x, n + ".ln1");
    auto k = linear(t, a, n + ".self.k.w");
    auto v = linear(t, a, n + ".self.v.w");
    x = ad::add(x, dropout(t, attention(t, a, k, v, n + ".self", false)));
    x = ad::add(x, dropout(t, feed_forward(t, norm(t, x, n + ".ln2"), n)));
  }
  return norm(t, x, "enc.ln");
}

Var ParserModel::init_nodes(Tape& t, const GraphBatch& g) {
  if (g.nodes == 0) return t.constant(Tensor(0, cfg_.d_model));
  auto e = ad::gather_rows(p(t, "emb.text"), g.token_ids);
  auto s = ad::scatter_add_rows(e, g.token_node, g.nodes);
  Tensor w(g.nodes, 1);
  std::copy(g.inv_token_count.begin(), g.inv_token_count.end(), w.data.begin());
  return ad::scale_rows(s, t.constant(std::move(w)));
}

Var ParserModel::gat_layer(Tape& t, std::size_t layer, Var h, const GraphBatch& g, std::vector<Tensor>* alpha) {
  auto n = layer_name("gat", layer);
  std::vector<Var> heads;
  heads.reserve(cfg_.gat_heads);
  if (alpha) alpha->clear();
  for (std::size_t k = 0; k < cfg_.gat_heads; ++k) {
    auto hn = n + ".h" + std::to_string(k);
    auto ht = ad::matmul(h, p(t, hn + ".w_target"));
    auto hs = ad::matmul(h, p(t, hn + ".w_source"));
    auto hs_e = ad::gather_rows(hs, g.src);
    auto z = ad::leaky_relu(ad::add(ad::gather_rows(ht, g.dst), hs_e), 0.2);
    auto a = ad::segment_softmax(ad::matmul(z, p(t, hn + ".attn")), g.dst, g.nodes);
    if (alpha) alpha->push_back(a.value());
    heads.push_back(ad::scatter_add_rows(ad::scale_rows(hs_e, a), g.dst, g.nodes));
  }
  auto cat = cfg_.gat_heads == 1 ? heads[0] : ad::concat_cols(heads);
  return ad::elu(ad::add_bias(cat, p(t, n + ".b")));
}

Var ParserModel::encode_graph(Tape& t, const GraphBatch& g, std::vector<std::vector<Tensor>>* alpha) {
  auto h = init_nodes(t, g);
  if (alpha) alpha->assign(cfg_.gat_layers, {});
  if (g.nodes == 0) return h;
  for (std::size_t l = 0; l < cfg_.gat_layers; ++l) {
    auto out = gat_layer(t, l, dropout(t, h), g, alpha ? &(*alpha)[l] : nullptr);
    h = cfg_.gat_residual ? ad::add(h, out) : out;
  }
  return h;
}

DecoderMemory ParserModel::prepare_memory(Tape& t, Var z, Var h) {
  std::vector<Var> parts{z, h};
  auto m = ad::concat_rows(parts);
  DecoderMemory mem;
  for (std::size_t l = 0; l < cfg_.decoder_layers; ++l) {
    auto n = layer_name("dec", l);
    mem.keys.push_back(linear(t, m, n + ".cross.k.w"));
    mem.values.push_back(linear(t, m, n + ".cross.v.w"));
  }
  return mem;
}

Var ParserModel::decoder_states(Tape& t, const DecoderMemory& mem, Var h, std::span<const OutputToken> prefix) {
  if (prefix.empty()) throw std::invalid_argument("decoder_states: empty prefix");
  std::vector<Var> table_parts{p(t, "emb.syntax"), h};
  auto table = ad::concat_rows(table_parts);
  const auto vs = static_cast<std::uint32_t>(syntax_.size());
  std::vector<std::uint32_t> rows;
  rows.reserve(prefix.size());
  for (const auto& tok : prefix) rows.push_back(tok.tag == OutputToken::Tag::syntax ? tok.index : vs + tok.index);
  auto x = dropout(t, ad::add_const(ad::gather_rows(table, rows), positions(prefix.size())));
  for (std::size_t l = 0; l < cfg_.decoder_layers; ++l) {
    auto n = layer_name("dec", l);
    auto a = norm(t, x, n + ".ln1");
    x = ad::add(x, dropout(t, attention(t, a, linear(t, a, n + ".self.k.w"), linear(t, a, n + ".self.v.w"),
                                        n + ".self", true)));
    auto c = norm(t, x, n + ".ln2");
    x = ad::add(x, dropout(t, attention(t, c, mem.keys[l], mem.values[l], n + ".cross", false)));
    x = ad::add(x, dropout(t, feed_forward(t, norm(t, x, n + ".ln3"), n)));
  }
  return norm(t, x, "dec.ln");
}

Var ParserModel::output_logits(Tape& t, Var states, Var h) {
  std::vector<Var> parts{ad::matmul(states, p(t, "out.w1")), ad::matmul_nt(states, h)};
  return ad::concat_cols(parts);
}

Var ParserModel::decode_step(Tape& t, const DecoderMemory& mem, Var h, std::span<const OutputToken> prefix) {
  auto s = decoder_states(t, mem, h, prefix);
  auto last = ad::slice_rows(s, s.rows() - 1, s.rows());
  return ad::softmax_rows(output_logits(t, last, h));
}

Var ParserModel::sequence_loss(Tape& t, Var z, Var h, std::span<const OutputToken> gold) {
  if (gold.empty()) throw std::invalid_argument("sequence_loss: empty target");
  std::vector<OutputToken> prefix;
  prefix.reserve(gold.size());
  prefix.push_back(OutputToken::syntax(bos_));
  prefix.insert(prefix.end(), gold.begin(), gold.end() - 1);
  auto mem = prepare_memory(t, z, h);
  auto states = decoder_states(t, mem, h, prefix);
  auto logp = ad::log_softmax_rows(output_logits(t, states, h));
  const auto vs = static_cast<std::uint32_t>(syntax_.size());
  const auto n = static_cast<std::uint32_t>(h.rows());
  std::vector<std::uint32_t> target;
  target.reserve(gold.size());
  for (const auto& tok : gold) {
    if (tok.tag == OutputToken::Tag::node && tok.index >= n) throw std::out_of_range("sequence_loss: node index");
    target.push_back(tok.tag == OutputToken::Tag::syntax ? tok.index : vs + tok.index);
  }
  return ad::scale(ad::mean(ad::pick(logp, target)), -1.0);
}

std::vector<OutputToken> ParserModel::parse(std::span<const std::uint32_t> input_ids, const GraphInput& graph,
                                            std::size_t max_len) {
  Tape t(false);
  auto z = encode_utterance(t, input_ids);
  std::span<const GraphInput> one(&graph, 1);
  auto gb = batch_graphs(one);
  auto h = encode_graph(t, gb);
  auto mem = prepare_memory(t, z, h);
  StepLogits step = [&](std::span<const OutputToken> prefix) {
    auto s = decoder_states(t, mem, h, prefix);
    auto last = ad::slice_rows(s, s.rows() - 1, s.rows());
    return output_logits(t, last, h).value();
  };
  return greedy_decode(step, syntax_.size(), bos_, eoq_, max_len ? max_len : cfg_.max_decode_len);
}

void ParserModel::save(const std::filesystem::path& dir, const nlohmann::json& metadata) const {
  std::filesystem::create_directories(dir);
  nlohmann::json meta = metadata;
  meta["config"] = cfg_.to_json();
  ad::save_checkpoint(params_, dir, meta.dump());
  text_.save(dir / "vocab.txt");
  syntax_.save(dir / "syntax_vocab.txt");
}

ParserModel ParserModel::load(const std::filesystem::path& dir) {
  auto meta = nlohmann::json::parse(ad::read_checkpoint_metadata(dir));
  ParserModel m(ModelConfig::from_json(meta.at("config")), Vocabulary::load(dir / "vocab.txt"),
                Vocabulary::load(dir / "syntax_vocab.txt"));
  ad::load_checkpoint(m.params_, dir);
  return m;
}

std::vector<OutputToken> greedy_decode(const StepLogits& step, std::size_t syntax_size, std::uint32_t bos,
                                       std::uint32_t eoq, std::size_t max_len) {
  std::vector<OutputToken> seq{OutputToken::syntax(bos)};
  while (seq.size() - 1 < max_len) {
    auto logits = step(seq);
    if (logits.numel() == 0) break;
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.numel(); ++i)
      if (logits.data[i] > logits.data[best]) best = i;
    OutputToken tok = best < syntax_size ? OutputToken::syntax(static_cast<std::uint32_t>(best))
                                         : OutputToken::node(static_cast<std::uint32_t>(best - syntax_size));
    seq.push_back(tok);
    if (tok.tag == OutputToken::Tag::syntax && tok.index == eoq) break;
  }
  return {seq.begin() + 1, seq.end()};
}

}  // namespace dcg::model
