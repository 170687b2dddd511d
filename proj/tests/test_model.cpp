// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include <cmath>
#include <filesystem>

#include "dcg/ad/grad_check.hpp"
#include "dcg/ad/ops.hpp"
#include "dcg/graph/context_graph.hpp"
#include "dcg/model/compose.hpp"
#include "dcg/model/parser_model.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace dcg;
using namespace dcg::model;

namespace {

Vocabulary film_vocab(const kg::KnowledgeGraph& g) {
  std::set<std::string> toks;
  for (kg::TermId t = 0; t < g.term_count(); ++t)
    for (auto& w : text::tokenize(g.label(t))) toks.insert(w);
  for (auto u : testing::kFilmUtterances)
    for (auto& w : text::tokenize(u)) toks.insert(w);
  return make_text_vocab({toks.begin(), toks.end()});
}

ModelConfig tiny(std::size_t d = 8) {
  ModelConfig c;
  c.d_model = d;
  c.ff_dim = 2 * d;
  c.max_decode_len = 24;
  return c;
}

GraphInput random_graph_input(util::Rng& rng, std::size_t vocab) {
  GraphInput g;
  auto n = 1 + rng.below(8);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> toks;
    auto k = 1 + rng.below(3);
    for (std::size_t j = 0; j < k; ++j) toks.push_back(static_cast<std::uint32_t>(rng.below(vocab)));
    g.node_tokens.push_back(toks);
  }
  auto m = rng.below(2 * n + 1);
  for (std::size_t e = 0; e < m; ++e)
    g.edges.emplace_back(static_cast<std::uint32_t>(rng.below(n)), static_cast<std::uint32_t>(rng.below(n)));
  return g;
}

ad::Tensor encode(ParserModel& m, std::span<const GraphInput> gs) {
  ad::Tape t(false);
  return m.encode_graph(t, batch_graphs(gs)).value();
}

graph::ContextSubgraph verification_graph(const kg::KnowledgeGraph& g) {
  graph::ContextSubgraph sg;
  sg.add_triple(g, *g.find("Q76025"), *g.find("P161"), *g.find("Q24807818"), graph::Origin::ent_hop);
  return sg;
}

}  // namespace

TEST_CASE("compose input") {
  auto g = testing::film_graph();
  auto cur = text::tokenize(testing::kFilmUtterances[0]);
  CHECK(text::join(compose_input({}, {}, cur)) == "[CLS] [SEP] [SEP] who starred in mathias kneissl ?");
  auto a1 = sparql::execute(g, sparql::parse_sparql(testing::kFilmQueries[0]));
  auto two = compose_input(cur, answer_tokens(a1, g), text::tokenize(testing::kFilmUtterances[1]));
  CHECK(text::join(two) ==
        "[CLS] who starred in mathias kneissl ? [SEP] rainer werner fassbinder , volker schlöndorff , hanna "
        "schygulla [SEP] who was the director of that work of art ?");
  auto no = answer_tokens(sparql::Answer::boolean(false), g);
  CHECK(text::join(compose_input({}, no, {})) == "[CLS] [SEP] no [SEP]");
  CHECK(answer_tokens(sparql::Answer::count(12), g) == std::vector<std::string>{"12"});

  // Truncation drops the previous utterance first, then the answer.
  std::vector<std::string> p = {"a", "b"}, a = {"c", "d"}, c = {"e", "f"};
  CHECK(text::join(compose_input(p, a, c, 8)) == "[CLS] b [SEP] c d [SEP] e f");
  CHECK(text::join(compose_input(p, a, c, 5)) == "[CLS] [SEP] [SEP] e f");
  CHECK(text::join(compose_input(p, a, c, 4)) == "[CLS] [SEP] [SEP] f");

  std::vector<std::string> ids;
  for (int i = 0; i < 12; ++i) ids.push_back("Q" + std::to_string(i));
  auto many = answer_tokens(sparql::Answer::entity_set(ids), g);
  CHECK(std::count(many.begin(), many.end(), ",") == 9);
}

TEST_CASE("utterance encoder shape and determinism") {
  auto g = testing::film_graph();
  ParserModel m(tiny(), film_vocab(g), default_syntax_vocab());
  auto ids = encode_tokens(m.text_vocab(), text::tokenize("who starred in zzzunknown ?"));
  CHECK(ids[3] == *m.text_vocab().find(kUnk));
  ad::Tape t1(false), t2(false);
  auto z1 = m.encode_utterance(t1, ids).value();
  auto z2 = m.encode_utterance(t2, ids).value();
  CHECK(z1.rows() == ids.size());
  CHECK(z1.cols() == 8);
  for (double v : z1.data) CHECK(std::isfinite(v));
  // Bitwise equality is not guaranteed: vectorized kernels depend on buffer alignment.
  REQUIRE(z1.data.size() == z2.data.size());
  for (std::size_t i = 0; i < z1.data.size(); ++i) CHECK(std::abs(z1.data[i] - z2.data[i]) < 1e-12);
}

TEST_CASE("node initialization is the label-token mean") {
  auto g = testing::film_graph();
  ParserModel m(tiny(), film_vocab(g), default_syntax_vocab());
  const auto& emb = m.params().at("emb.text").value;
  const auto& v = m.text_vocab();
  GraphInput gi;
  gi.node_tokens = {{*v.find("dubashi")},
                    {*v.find("common"), *v.find("name")},
                    {*v.find("name"), *v.find("common")},
                    {*v.find("rainer"), *v.find("werner"), *v.find("fassbinder")}};
  ad::Tape t(false);
  std::vector<GraphInput> one{gi};
  auto h0 = m.init_nodes(t, batch_graphs(one)).value();
  for (std::size_t c = 0; c < 8; ++c) {
    CHECK(h0.at(0, c) == emb.at(gi.node_tokens[0][0], c));
    CHECK(h0.at(1, c) == doctest::Approx(h0.at(2, c)).epsilon(1e-15));
    double mean = 0;
    for (auto id : gi.node_tokens[3]) mean += emb.at(id, c);
    CHECK(h0.at(3, c) == doctest::Approx(mean / 3).epsilon(1e-12));
  }
}

TEST_CASE("GAT layer on a three-node path, computed by hand") {
  ModelConfig c = tiny(2);
  c.heads = 1;
  c.gat_heads = 1;
  c.gat_layers = 1;
  ParserModel m(c, make_text_vocab({"a", "b", "c"}), default_syntax_vocab());
  auto& ps = m.params();
  ps.at("gat.0.h0.w_target").value = ad::Tensor({2, 2}, {1, 0, 0, 1});
  ps.at("gat.0.h0.w_source").value = ad::Tensor({2, 2}, {0.5, 0, 0, -1});
  ps.at("gat.0.h0.attn").value = ad::Tensor({2, 1}, {1, 2});
  ps.at("gat.0.b").value = ad::Tensor({1, 2}, {0.1, 0});

  GraphInput gi;
  gi.node_tokens = {{0}, {1}, {2}};
  gi.edges = {{0, 1}, {1, 2}};
  std::vector<GraphInput> one{gi};
  auto gb = batch_graphs(one);
  ad::Tape t(false);
  auto h = t.constant(ad::Tensor({3, 2}, {1, 0, 0, 1, 1, 1}));
  std::vector<ad::Tensor> alpha;
  auto out = m.gat_layer(t, 0, h, gb, &alpha).value();

  // h_t = h, h_s = h * diag(0.5, -1):
  //   node 0: only itself -> alpha 1, sum = (0.5, 0)
  //   node 1: self (0,-1) and source node 0 (0.5, 0), target (0, 1)
  //     z_self = lrelu((0,1)+(0,-1)) = (0,0) -> e = 0
  //     z_0    = lrelu((0,1)+(0.5,0)) = (0.5,1) -> e = 2.5
  //   node 2: self (0.5,-1) and source node 1 (0,-1), target (1, 1)
  //     z_self = lrelu((1.5, 0)) -> e = 1.5
  //     z_1    = lrelu((1, 0)) -> e = 1
  auto elu = [](double x) { return x > 0 ? x : std::expm1(x); };
  double a10 = 1.0 / (1.0 + std::exp(-2.5));
  double a22 = 1.0 / (1.0 + std::exp(-0.5));
  double expect[3][2] = {{elu(0.5 + 0.1), elu(0.0)},
                         {elu(a10 * 0.5 + 0.1), elu((1 - a10) * -1.0)},
                         {elu(a22 * 0.5 + 0.1), elu(a22 * -1.0 + (1 - a22) * -1.0)}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) CHECK(out.at(i, j) == doctest::Approx(expect[i][j]).epsilon(1e-12));

  // Attention over each neighbourhood sums to one; a lone self-loop gets 1.
  REQUIRE(alpha.size() == 1);
  std::vector<double> sums(3, 0.0);
  for (std::size_t e = 0; e < gb.dst.size(); ++e) sums[gb.dst[e]] += alpha[0].data[e];
  for (double s : sums) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(alpha[0].data[0] == 1.0);
}

TEST_CASE("batching and permutation") {
  ParserModel m(tiny(), make_text_vocab({"a", "b", "c", "d", "e", "f"}), default_syntax_vocab());
  util::Rng rng(8);
  for (int round = 0; round < 10; ++round) {
    std::vector<GraphInput> gs;
    for (int k = 0; k < 3; ++k) gs.push_back(random_graph_input(rng, m.text_vocab().size()));
    auto gb = batch_graphs(gs);
    for (std::size_t e = 0; e < gb.src.size(); ++e) {
      auto graph = std::upper_bound(gb.offsets.begin(), gb.offsets.end(), gb.src[e]) - gb.offsets.begin();
      auto graph2 = std::upper_bound(gb.offsets.begin(), gb.offsets.end(), gb.dst[e]) - gb.offsets.begin();
      CHECK(graph == graph2);
    }
    auto all = encode(m, gs);
    for (std::size_t k = 0; k < gs.size(); ++k) {
      auto single = encode(m, std::span(&gs[k], 1));
      for (std::size_t r = 0; r < single.rows(); ++r)
        for (std::size_t c = 0; c < single.cols(); ++c)
          CHECK(std::abs(single.at(r, c) - all.at(gb.offsets[k] + r, c)) <= 1e-9);
    }

    // Reverse the node order of the first graph.
    auto g = gs[0];
    auto n = static_cast<std::uint32_t>(g.node_tokens.size());
    GraphInput p;
    p.node_tokens.assign(g.node_tokens.rbegin(), g.node_tokens.rend());
    for (auto [s, d] : g.edges) p.edges.emplace_back(n - 1 - s, n - 1 - d);
    auto a = encode(m, std::span(&g, 1)), b = encode(m, std::span(&p, 1));
    for (std::uint32_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < a.cols(); ++c) CHECK(std::abs(a.at(r, c) - b.at(n - 1 - r, c)) <= 1e-9);
  }
  std::vector<GraphInput> sizes(2);
  sizes[0].node_tokens.assign(3, {0});
  sizes[1].node_tokens.assign(4, {0});
  sizes[1].edges = {{0, 3}};
  auto b = batch_graphs(sizes);
  CHECK(b.nodes == 7);
  CHECK(b.src.size() == 8);  // seven self-loops plus one edge
  CHECK(b.src.back() == 3);
  CHECK(b.dst.back() == 6);
}

TEST_CASE("edgeless graph still encodes") {
  ParserModel m(tiny(), make_text_vocab({"a"}), default_syntax_vocab());
  std::vector<GraphInput> gs(1);
  gs[0].node_tokens = {{0}, {1}};
  auto h = encode(m, gs);
  CHECK(h.rows() == 2);
  for (double x : h.data) CHECK(std::isfinite(x));
}

TEST_CASE("decode step is a distribution over syntax and nodes") {
  auto g = testing::film_graph();
  ParserModel m(tiny(), film_vocab(g), default_syntax_vocab());
  auto sg = graph::entity_subgraph(g, std::vector<kg::TermId>{*g.find("Q3298576")});
  auto gi = graph_input(sg, m.text_vocab());
  auto ids = encode_tokens(m.text_vocab(), text::tokenize(testing::kFilmUtterances[0]));
  ad::Tape t(false);
  std::vector<GraphInput> one{gi};
  auto h = m.encode_graph(t, batch_graphs(one));
  auto z = m.encode_utterance(t, ids);
  auto mem = m.prepare_memory(t, z, h);
  std::vector<OutputToken> prefix{OutputToken::syntax(m.bos())};
  for (int step = 0; step < 4; ++step) {
    auto p = m.decode_step(t, mem, h, prefix).value();
    CHECK(p.numel() == m.syntax_vocab().size() + sg.size());
    double s = 0;
    for (double x : p.data) s += x;
    CHECK(std::abs(s - 1.0) <= 1e-9);
    prefix.push_back(step % 2 ? OutputToken::node(1) : OutputToken::syntax(4));
  }
  auto a = m.parse(ids, gi), b = m.parse(ids, gi);
  CHECK(a == b);
  CHECK(m.parse(ids, gi, 1).size() == 1);
}

TEST_CASE("end-to-end gradient through a tiny parser") {
  auto g = testing::film_graph();
  ParserModel m(tiny(), film_vocab(g), default_syntax_vocab());
  auto sg = verification_graph(g);
  auto gi = graph_input(sg, m.text_vocab());
  auto ids = encode_tokens(m.text_vocab(), text::tokenize("does dubashi have that person ?"));
  auto gold = align_query(sparql::parse_sparql(testing::kFilmQueries[2]), m.syntax_vocab(), sg);
  REQUIRE(gold.reachable);
  std::vector<GraphInput> one{gi};
  auto gb = batch_graphs(one);
  auto f = [&](ad::Tape& t) {
    auto h = m.encode_graph(t, gb);
    return m.sequence_loss(t, m.encode_utterance(t, ids), h, gold.tokens);
  };
  std::vector<ad::Parameter*> some;
  for (auto* p : m.params().all())
    if (p->name.rfind("gat.", 0) == 0 || p->name.find("cross") != std::string::npos || p->name == "out.w1")
      some.push_back(p);
  REQUIRE_FALSE(some.empty());
  auto r = ad::grad_check_params(f, some, 1e-5);
  CHECK(r.max_rel_error < 1e-3);
}

TEST_CASE("alignment and realization") {
  auto g = testing::film_graph();
  auto voc = default_syntax_vocab();
  auto sg = graph::entity_subgraph(g, std::vector<kg::TermId>{*g.find("Q3298576")});
  auto q = sparql::parse_sparql(testing::kFilmQueries[0]);
  auto al = align_query(q, voc, sg);
  CHECK(al.reachable);
  CHECK(al.tokens.back() == OutputToken::syntax(*voc.find(kEoq)));
  CHECK(realize(al.tokens, voc, sg) == testing::kFilmQueries[0]);
  for (const auto& tok : al.tokens)
    if (tok.tag == OutputToken::Tag::syntax) CHECK(voc.symbol(tok.index).find(':') == std::string::npos);

  auto miss = align_query(sparql::parse_sparql(testing::kFilmQueries[2]), voc, sg);
  CHECK_FALSE(miss.reachable);
  CHECK(std::find(miss.missing.begin(), miss.missing.end(), "Q24807818") != miss.missing.end());
}

TEST_CASE("rigged decoder reproduces the verification query") {
  auto g = testing::film_graph();
  auto voc = default_syntax_vocab();
  auto sg = verification_graph(g);
  std::vector<OutputToken> want = {OutputToken::syntax(*voc.find("ASK")),
                                   OutputToken::syntax(*voc.find("{")),
                                   OutputToken::node(*sg.index_of("Q76025")),
                                   OutputToken::node(*sg.index_of("P161")),
                                   OutputToken::node(*sg.index_of("Q24807818")),
                                   OutputToken::syntax(*voc.find(".")),
                                   OutputToken::syntax(*voc.find("}")),
                                   OutputToken::syntax(*voc.find(kEoq))};
  const auto vs = voc.size(), n = sg.size();
  auto step = [&](std::span<const OutputToken> prefix) {
    ad::Tensor l(1, vs + n, -1.0);
    const auto& next = want.at(prefix.size() - 1);
    l.data[next.tag == OutputToken::Tag::syntax ? next.index : vs + next.index] = 5.0;
    return l;
  };
  auto bos = *voc.find(kBos), eoq = *voc.find(kEoq);
  auto out = greedy_decode(step, vs, bos, eoq, 32);
  CHECK(out == want);
  CHECK(realize(out, voc, sg) == testing::kFilmQueries[2]);
  CHECK(greedy_decode(step, vs, bos, eoq, 1).size() == 1);
}

TEST_CASE("save and load") {
  auto g = testing::film_graph();
  ParserModel m(tiny(), film_vocab(g), default_syntax_vocab());
  auto dir = std::filesystem::temp_directory_path() / "dcg_model_test";
  std::filesystem::remove_all(dir);
  m.save(dir);
  auto back = ParserModel::load(dir);
  CHECK(back.config().d_model == 8);
  CHECK(back.text_vocab().symbols() == m.text_vocab().symbols());
  auto sg = verification_graph(g);
  auto ids = encode_tokens(m.text_vocab(), text::tokenize("does dubashi have that person ?"));
  CHECK(back.parse(ids, graph_input(sg, m.text_vocab())) == m.parse(ids, graph_input(sg, m.text_vocab())));
}
