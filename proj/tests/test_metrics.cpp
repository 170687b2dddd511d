// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/eval/metrics.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace dcg;
using namespace dcg::eval;
using sparql::Answer;

TEST_CASE("exact match canonicalizes") {
  auto q1 = testing::kFilmQueries[0];
  CHECK(exact_match(q1, q1) == 1);
  CHECK(exact_match("SELECT  ?x  WHERE {  wd:Q3298576 wdt:P161 ?x .   ?x wdt:P31 wd:Q502895 . }", q1) == 1);
  CHECK(exact_match("SELECT ?x WHERE {wd:Q3298576 wdt:P161 ?x.?x wdt:P31 wd:Q502895.}", q1) == 1);
  CHECK(exact_match(testing::kFilmQueries[1], q1) == 0);
  CHECK(exact_match("garbage  out", "garbage out") == 1);
  CHECK(exact_match("garbage", q1) == 0);
}

TEST_CASE("set F1") {
  auto f = [](std::vector<std::string> a, std::vector<std::string> b) {
    return set_f1(Answer::entity_set(std::move(a)), Answer::entity_set(std::move(b))).score;
  };
  CHECK(f({"a", "b"}, {"b", "c"}) == 0.5);
  CHECK(f({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(f({}, {"a"}) == 0.0);
  CHECK(f({"a"}, {}) == 0.0);
  CHECK(f({}, {}) == 1.0);
  CHECK(f({"a"}, {"a", "b", "c"}) == doctest::Approx(0.5));
  CHECK(f({"a", "b", "c"}, {"a"}) == f({"a"}, {"a", "b", "c"}));
  auto mm = set_f1(Answer::boolean(true), Answer::entity_set({"a"}));
  CHECK(mm.score == 0.0);
  CHECK(mm.kind_mismatch);
}

TEST_CASE("answer accuracy") {
  CHECK(answer_accuracy(Answer::boolean(false), Answer::boolean(false)).score == 1.0);
  CHECK(answer_accuracy(Answer::boolean(true), Answer::boolean(false)).score == 0.0);
  CHECK(answer_accuracy(Answer::count(2), Answer::count(2)).score == 1.0);
  CHECK(answer_accuracy(Answer::count(2), Answer::count(3)).score == 0.0);
  auto mm = answer_accuracy(Answer::count(1), Answer::boolean(true));
  CHECK(mm.score == 0.0);
  CHECK(mm.kind_mismatch);
}

TEST_CASE("turn scoring picks the metric by gold kind") {
  auto g = testing::film_graph();
  auto gold1 = sparql::execute(g, sparql::parse_sparql(testing::kFilmQueries[0]));
  auto s = score_turn(testing::kFilmQueries[0], gold1, testing::kFilmQueries[0], gold1);
  CHECK(s.em == 1);
  REQUIRE(s.f1);
  CHECK(*s.f1 == 1.0);
  CHECK_FALSE(s.accuracy);

  auto gold3 = Answer::boolean(false);
  auto v = score_turn("not a query", std::nullopt, testing::kFilmQueries[2], gold3);
  CHECK(v.em == 0);
  CHECK(v.unexecutable);
  REQUIRE(v.accuracy);
  CHECK(*v.accuracy == 0.0);
}

TEST_CASE("aggregation") {
  CHECK(aggregate({}).turns == 0);
  CHECK(aggregate({}).overall_em == 0.0);

  TurnScore a;
  a.em = 1;
  a.f1 = 1.0;
  a.question_type = "A";
  a.turn_position = 1;
  std::vector<TurnScore> one{a};
  CHECK(aggregate(one).overall_em == 1.0);

  TurnScore b = a, c = a;
  b.question_type = "B";
  b.em = 0;
  b.f1 = 0.0;
  b.turn_position = 2;
  b.phenomena = {"ellipsis"};
  c.turn_position = 2;
  // Types: A has EM 1 (two turns), B has EM 0 (one turn).
  std::vector<TurnScore> xs{a, b, c};
  auto r = aggregate(xs);
  CHECK(r.overall_em == 0.5);
  CHECK(r.micro_em == doctest::Approx(2.0 / 3));
  CHECK(r.by_type.at("A").count == 2);
  CHECK(r.by_turn_position.at(2).em == 0.5);
  CHECK(r.by_phenomenon.at("ellipsis").em == 0.0);

  std::vector<TurnScore> ys{c, b, a};
  auto r2 = aggregate(ys);
  CHECK(r2.to_json() == r.to_json());
  CHECK_FALSE(r.to_table().empty());
}
