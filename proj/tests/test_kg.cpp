// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "support.hpp"

using namespace dcg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("dcg_kg_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("load a one-triple file") {
  auto d = scratch("one");
  write(d / "t.tsv", "Q76025\tP161\tQ24807818\n");
  write(d / "l.tsv", "Q76025\tReinhard Hauff\n");
  auto g = kg::load_graph(d / "t.tsv", d / "l.tsv", "P31");
  CHECK(g.counts().triples == 1);
  auto s = g.find("Q76025");
  REQUIRE(s);
  auto out = g.outgoing(*s);
  REQUIRE(out.size() == 1);
  CHECK(g.id(out[0].object) == "Q24807818");
  CHECK(g.label(*s) == "Reinhard Hauff");
  // Missing label: placeholder, flagged unlabeled.
  auto o = *g.find("Q24807818");
  CHECK_FALSE(g.labeled(o));
  CHECK(g.label(o) == kg::unlabeled_placeholder("Q24807818"));
}

TEST_CASE("malformed rows report the line") {
  auto d = scratch("bad");
  write(d / "t.tsv", "# comment\nQ1\tP1\tQ2\nQ1\tP1\n");
  write(d / "l.tsv", "");
  try {
    kg::load_graph(d / "t.tsv", d / "l.tsv", "P31");
    FAIL("expected KgFormatError");
  } catch (const kg::KgFormatError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS(kg::load_graph(d / "missing.tsv", d / "l.tsv", "P31"));
}

TEST_CASE("element kinds follow position") {
  auto g = testing::film_graph();
  CHECK(g.kind(*g.find("P161")) == kg::ElementKind::relation);
  CHECK(g.kind(*g.find("Q502895")) == kg::ElementKind::type);
  CHECK(g.kind(*g.find("Q3298576")) == kg::ElementKind::entity);
  auto c = g.counts();
  CHECK(c.entities + c.relations + c.types == g.term_count());
  CHECK(g.types_of("Q3298576") == std::vector<kg::TermId>{*g.find("Q838948")});
}

TEST_CASE("neighborhood contains the verification triple's subject edges") {
  auto g = testing::film_graph();
  auto n = g.neighborhood("Q3298576");
  auto has = [&](const char* s, const char* p, const char* o) {
    kg::Triple t{*g.find(s), *g.find(p), *g.find(o)};
    return std::find(n.begin(), n.end(), t) != n.end();
  };
  CHECK(has("Q3298576", "P57", "Q76025"));
  CHECK(has("Q3298576", "P161", "Q44426"));
  CHECK(has("Q3298576", "P31", "Q838948"));
  CHECK(n.size() == 5);
  CHECK(g.neighborhood("Q0000").empty());
}

TEST_CASE("indexes agree with a linear scan on random graphs") {
  util::Rng rng(11);
  for (int round = 0; round < 10; ++round) {
    auto g = testing::random_graph(rng, {40, 4, 3, 250});
    const auto all = g.triples();
    CHECK(std::is_sorted(all.begin(), all.end()));
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    for (kg::TermId t = 0; t < g.term_count(); ++t) {
      std::vector<kg::Triple> out, in, nb;
      for (const auto& tr : all) {
        if (tr.subject == t) out.push_back(tr);
        if (tr.object == t) in.push_back(tr);
        if (tr.subject == t || tr.object == t) nb.push_back(tr);
      }
      CHECK(g.outgoing(t) == out);
      CHECK(g.incoming(t) == in);
      auto got = g.neighborhood(t);
      std::sort(got.begin(), got.end());
      CHECK(got == nb);
    }
    for (int k = 0; k < 50; ++k) {
      const auto& tr = all[rng.below(all.size())];
      std::vector<kg::TermId> objs, subs;
      for (const auto& x : all) {
        if (x.subject == tr.subject && x.predicate == tr.predicate) objs.push_back(x.object);
        if (x.predicate == tr.predicate && x.object == tr.object) subs.push_back(x.subject);
      }
      auto o = g.objects(tr.subject, tr.predicate);
      auto s = g.subjects(tr.predicate, tr.object);
      CHECK(std::vector<kg::TermId>(o.begin(), o.end()) == objs);
      CHECK(std::vector<kg::TermId>(s.begin(), s.end()) == subs);
      CHECK(g.contains(tr.subject, tr.predicate, tr.object));
    }
  }
}

TEST_CASE("dump and reload round-trips") {
  auto g = testing::film_graph();
  auto d = scratch("rt");
  kg::dump_graph(g, d / "t.tsv", d / "l.tsv");
  auto h = kg::load_graph(d / "t.tsv", d / "l.tsv", "P31");
  REQUIRE(h.counts().triples == g.counts().triples);
  for (const auto& t : g.triples()) {
    CHECK(h.contains(*h.find(g.id(t.subject)), *h.find(g.id(t.predicate)), *h.find(g.id(t.object))));
  }
  for (kg::TermId t = 0; t < g.term_count(); ++t) {
    auto u = h.find(g.id(t));
    REQUIRE(u);
    CHECK(h.label(*u) == g.label(t));
    CHECK(h.kind(*u) == g.kind(t));
  }
}

TEST_CASE("label token index") {
  auto g = testing::film_graph();
  auto hits = g.terms_with_label_token("fassbinder");
  CHECK(hits.size() == 2);
  CHECK(g.terms_with_label_token("nothing").empty());
}
