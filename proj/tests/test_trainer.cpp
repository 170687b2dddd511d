// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "dcg/pipeline/turn.hpp"
#include "dcg/train/synthetic.hpp"
#include "dcg/train/trainer.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace dcg;
using namespace dcg::train;

namespace {

struct Film {
  kg::KnowledgeGraph g = testing::film_graph();
  std::vector<data::Interaction> corpus{testing::film_interaction(g)};
  linker::PopularityTable pop = linker::build_popularity(corpus);
  linker::EntityMatcher matcher{g};
  pipeline::KgResources res() const { return {&g, &matcher, &pop}; }
};

struct Small {
  SyntheticCorpus c;
  linker::PopularityTable pop;
  linker::EntityMatcher matcher;
  explicit Small(std::size_t n = 12) : c(make(n)), pop(linker::build_popularity(c.train)), matcher(c.graph) {}
  static SyntheticCorpus make(std::size_t n) {
    SyntheticConfig cfg;
    cfg.interactions = n;
    cfg.heldout_interactions = 2;
    return make_synthetic_corpus(cfg);
  }
  pipeline::KgResources res() const { return {&c.graph, &matcher, &pop}; }
};

model::ModelConfig small_model(std::size_t d = 16) {
  model::ModelConfig mc;
  mc.d_model = d;
  mc.ff_dim = 2 * d;
  mc.dropout = 0.0;
  mc.max_decode_len = 40;
  return mc;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("AdamW matches a hand-computed step") {
  ad::Parameter w{"w", ad::Tensor({1, 2}, {1.0, -2.0}), ad::Tensor({1, 2}, {0.5, -0.25})};
  AdamWConfig cfg;
  cfg.learning_rate = 0.1;
  AdamW opt(cfg);
  std::vector<ad::Parameter*> ps{&w};
  opt.step(ps);
  // First step: m_hat = g, v_hat = g^2, so the update is lr * (sign(g) + wd * w).
  auto expect = [&](double w0, double g) {
    return w0 - 0.1 * (g / (std::abs(g) + cfg.eps) + cfg.weight_decay * w0);
  };
  CHECK(w.value.data[0] == doctest::Approx(expect(1.0, 0.5)).epsilon(1e-14));
  CHECK(w.value.data[1] == doctest::Approx(expect(-2.0, -0.25)).epsilon(1e-14));

  // Second step with a new gradient, bias corrections by hand.
  const double w1 = w.value.data[0];
  w.grad.data = {-1.0, 0.0};
  opt.step(ps);
  double m = 0.9 * 0.1 * 0.5 + 0.1 * -1.0, v = 0.999 * 0.001 * 0.25 + 0.001 * 1.0;
  double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  CHECK(w.value.data[0] == doctest::Approx(w1 - 0.1 * (mh / (std::sqrt(vh) + cfg.eps) + 0.01 * w1)).epsilon(1e-12));
  CHECK(opt.steps() == 2);
}

TEST_CASE("global norm clipping") {
  ad::Parameter a{"a", ad::Tensor(1, 1), ad::Tensor({1, 1}, {3.0})};
  ad::Parameter b{"b", ad::Tensor(1, 1), ad::Tensor({1, 1}, {4.0})};
  std::vector<ad::Parameter*> ps{&a, &b};
  CHECK(clip_grad_norm(ps, 1.0) == doctest::Approx(5.0));
  CHECK(a.grad.data[0] == doctest::Approx(0.6));
  CHECK(b.grad.data[0] == doctest::Approx(0.8));
  CHECK(clip_grad_norm(ps, 10.0) == doctest::Approx(1.0));
  CHECK(a.grad.data[0] == doctest::Approx(0.6));
}

TEST_CASE("preprocessing the example interaction") {
  Film f;
  PreprocessConfig pc;
  auto ex = preprocess(f.corpus, f.res(), pc);
  REQUIRE(ex.size() == 4);
  CHECK(ex[1].subgraph.contains("Q3298576"));
  for (const auto& e : ex) CHECK(e.reachable);
  // Turns one and two copy the same film; in turn two it is one node.
  auto film = *ex[1].subgraph.index_of("Q3298576");
  auto copies = std::count(ex[1].gold.begin(), ex[1].gold.end(), model::OutputToken::node(film));
  CHECK(copies == 1);
  CHECK(text::join(ex[1].input).find("[SEP] rainer werner fassbinder ,") != std::string::npos);
  CHECK(text::join(ex[2].input).find("[SEP] reinhard hauff [SEP]") != std::string::npos);

  pc.t_max = 0;
  auto off = preprocess(f.corpus, f.res(), pc);
  graph::TurnContext fresh;
  fresh.t_max = 0;
  for (std::size_t i = 0; i < off.size(); ++i) {
    auto p = pipeline::prepare_turn(f.res(), fresh, f.corpus[0].turns[i].utterance, pc.turn);
    std::set<std::string> a, b;
    for (const auto& n : off[i].subgraph.nodes()) a.insert(n.element);
    for (const auto& n : p.graph.current.nodes()) b.insert(n.element);
    CHECK(a == b);
  }
  CHECK_FALSE(off[1].reachable);  // the film is only reachable through context
}

TEST_CASE("reachability equals an id-membership scan") {
  Small s;
  PreprocessConfig pc;
  PreprocessStats st;
  auto ex = preprocess(s.c.train, s.res(), pc, &st);
  CHECK(st.examples == ex.size());
  std::size_t unreachable = 0;
  for (const auto& e : ex) {
    bool all_in = true;
    for (const auto& id : sparql::constants(sparql::parse_sparql(e.gold_sparql)))
      all_in = all_in && e.subgraph.contains(id);
    CHECK(e.reachable == all_in);
    unreachable += !e.reachable;
    CHECK(e.gold.back() == model::OutputToken::syntax(*model::default_syntax_vocab().find(model::kEoq)));
  }
  CHECK(st.unreachable == unreachable);
  auto again = preprocess(s.c.train, s.res(), pc);
  REQUIRE(again.size() == ex.size());
  for (std::size_t i = 0; i < ex.size(); ++i) {
    CHECK(again[i].input == ex[i].input);
    CHECK(again[i].gold == ex[i].gold);
  }
}

TEST_CASE("synthetic corpus") {
  SyntheticConfig cfg;
  cfg.interactions = 40;
  auto c = make_synthetic_corpus(cfg);
  CHECK(c.train.size() == 40);
  std::set<int> dist;
  std::set<std::string> types;
  for (const auto* split : {&c.train, &c.heldout})
    for (const auto& it : *split)
      for (const auto& t : it.turns) {
        auto q = sparql::parse_sparql(t.sparql);
        CHECK(sparql::execute(c.graph, q) == t.answer);
        if (t.coref_distance < 0) dist.insert(t.coref_distance < -1 ? 2 : 1);  // stored as -k
        types.insert(t.question_type);
      }
  CHECK(dist == std::set<int>{1, 2});
  CHECK(types.size() == 6);

  auto d1 = std::filesystem::temp_directory_path() / "dcg_synth_a";
  auto d2 = std::filesystem::temp_directory_path() / "dcg_synth_b";
  write_synthetic_corpus(c, d1);
  write_synthetic_corpus(make_synthetic_corpus(cfg), d2);
  for (auto f : {"kg_triples.tsv", "kg_labels.tsv", "train.jsonl", "heldout.jsonl"}) {
    CHECK_FALSE(slurp(d1 / f).empty());
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  auto back = data::read_corpus(d1 / "train.jsonl");
  REQUIRE(back.size() == c.train.size());
  CHECK(data::to_json(back[3]) == data::to_json(c.train[3]));
}

TEST_CASE("batched loss equals the mean of single losses") {
  Small s(6);
  auto ex = preprocess(s.c.train, s.res(), {});
  model::ParserModel m(small_model(), build_text_vocab(ex, s.c.graph), model::default_syntax_vocab());
  std::vector<Featurized> fs;
  for (const auto& e : ex)
    if (e.reachable && fs.size() < 5) fs.push_back(featurize(m, e));
  std::vector<const Featurized*> batch;
  for (const auto& f : fs) batch.push_back(&f);
  ad::Tape t(false);
  double joint = batch_loss(t, m, batch).value().data[0];
  double sum = 0;
  for (const auto* f : batch) {
    ad::Tape u(false);
    sum += batch_loss(u, m, std::span(&f, 1)).value().data[0];
  }
  CHECK(std::abs(joint - sum / static_cast<double>(batch.size())) <= 1e-9);
}

TEST_CASE("name shuffling is a consistent injective renaming") {
  Small s(6);
  auto ex = preprocess(s.c.train, s.res(), {});
  model::ParserModel m(small_model(), build_text_vocab(ex, s.c.graph), model::default_syntax_vocab());
  auto pool = name_tokens(s.c.graph, m.text_vocab());
  REQUIRE(pool.size() > 20);
  for (auto id : pool) {
    const auto& w = m.text_vocab().symbol(id);
    CHECK_FALSE(text::is_stopword(w));
    CHECK(s.c.graph.terms_with_label_token(w).size() <= 3);
  }
  util::Rng rng(1);
  auto f = featurize(m, ex[0]);
  auto g = shuffle_names(f, pool, rng);
  CHECK(g.gold == f.gold);
  CHECK(g.input_ids.size() == f.input_ids.size());
  std::map<std::uint32_t, std::uint32_t> fwd, bwd;
  auto visit = [&](std::uint32_t a, std::uint32_t b) {
    CHECK(fwd.emplace(a, b).first->second == b);
    CHECK(bwd.emplace(b, a).first->second == a);
  };
  for (std::size_t i = 0; i < f.input_ids.size(); ++i) visit(f.input_ids[i], g.input_ids[i]);
  for (std::size_t n = 0; n < f.graph.node_tokens.size(); ++n)
    for (std::size_t k = 0; k < f.graph.node_tokens[n].size(); ++k) visit(f.graph.node_tokens[n][k], g.graph.node_tokens[n][k]);
}

TEST_CASE("training loop contracts") {
  Small s(6);
  auto ex = preprocess(s.c.train, s.res(), {});
  auto vocab = build_text_vocab(ex, s.c.graph);

  SUBCASE("zero learning rate leaves parameters untouched") {
    model::ParserModel m(small_model(), vocab, model::default_syntax_vocab());
    auto before = m.params().clone();
    TrainConfig tc;
    tc.optimizer.learning_rate = 0.0;
    tc.max_steps = 5;
    train::train(m, ex, {}, tc);
    auto b = before.all();
    auto a = m.params().all();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value.data == b[i]->value.data);
  }
  SUBCASE("fixed seed gives the same loss curve") {
    auto run = [&] {
      auto mc = small_model();
      mc.dropout = 0.1;
      model::ParserModel m(mc, vocab, model::default_syntax_vocab());
      TrainConfig tc;
      tc.max_epochs = 2;
      tc.name_pool = name_tokens(s.c.graph, m.text_vocab());
      std::vector<double> losses;
      for (const auto& e : train::train(m, ex, {}, tc).epochs) losses.push_back(e.train_loss);
      return losses;
    };
    auto a = run();
    CHECK(a.size() == 2);
    CHECK(a == run());
  }
  SUBCASE("non-finite loss aborts with the step") {
    model::ParserModel m(small_model(), vocab, model::default_syntax_vocab());
    m.params().at("out.w1").value.data[0] = std::numeric_limits<double>::quiet_NaN();
    TrainConfig tc;
    tc.max_steps = 3;
    try {
      train::train(m, ex, {}, tc);
      FAIL("expected NonFiniteLoss");
    } catch (const NonFiniteLoss& e) {
      CHECK(e.step() == 1);
      CHECK_FALSE(e.example_id().empty());
    }
  }
}

TEST_CASE("a single example is memorized in 200 steps") {
  Film f;
  auto ex = preprocess(f.corpus, f.res(), {});
  std::vector<TrainExample> one{ex[3]};  // the union turn
  model::ParserModel m(small_model(32), build_text_vocab(ex, f.g), model::default_syntax_vocab());
  TrainConfig tc;
  tc.batch_size = 1;
  tc.max_steps = 200;
  tc.max_epochs = 1000;
  auto r = train::train(m, one, {}, tc);
  CHECK(r.steps == 200);
  CHECK(r.epochs.back().train_loss < 0.01);
  auto p = predict(m, one[0], f.g);
  CHECK(p.sparql == testing::kFilmQueries[3]);
  REQUIRE(p.answer);
  CHECK(*p.answer == one[0].gold_answer);
}
