// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Fixtures and brute-force oracles shared by the unit tests and the
// acceptance binary.

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dcg/data/interaction.hpp"
#include "dcg/kg/knowledge_graph.hpp"
#include "dcg/linker/entity_linker.hpp"
#include "dcg/sparql/executor.hpp"
#include "dcg/sparql/query.hpp"
#include "dcg/text/tokenize.hpp"
#include "dcg/util/rng.hpp"

namespace dcg::testing {

// The four-turn film interaction. Ids of entities that appear only as
// answers (co-stars, the screenplays) are made up.
inline kg::KnowledgeGraph film_graph() {
  kg::KnowledgeGraph::Builder b("P31");
  const char* cast[] = {"Q44426", "Q9100001", "Q9100002"};
  for (auto c : cast) b.add_triple("Q3298576", "P161", c).add_triple(c, "P31", "Q502895");
  b.add_triple("Q3298576", "P57", "Q76025").add_triple("Q76025", "P31", "Q502895");
  b.add_triple("Q3298576", "P31", "Q838948");
  b.add_triple("Q24807818", "P31", "Q838948").add_triple("Q24807818", "P161", "Q9100003");
  b.add_triple("Q9100003", "P31", "Q502895");
  for (auto w : {"Q9100010", "Q9100011", "Q9100012"})
    b.add_triple(w, "P58", "Q44426").add_triple(w, "P31", "Q838948");
  b.add_triple("Q9100013", "P58", "Q230586").add_triple("Q9100013", "P31", "Q838948");
  b.add_triple("Q230586", "P31", "Q502895");
  b.add_triple("Q33561976", "P31", "Q838948");
  b.set_label("Q3298576", "Mathias Kneissl")
      .set_label("Q44426", "Rainer Werner Fassbinder")
      .set_label("Q33561976", "Rainer Werner Fassbinder")
      .set_label("Q9100001", "Volker Schlöndorff")
      .set_label("Q9100002", "Hanna Schygulla")
      .set_label("Q9100003", "Some Actor")
      .set_label("Q76025", "Reinhard Hauff")
      .set_label("Q24807818", "Dubashi")
      .set_label("Q230586", "Laura Esquivel")
      .set_label("Q838948", "work of art")
      .set_label("Q502895", "common name")
      .set_label("Q9100010", "The American Soldier")
      .set_label("Q9100011", "Lili Marleen")
      .set_label("Q9100012", "Love Is Colder Than Death")
      .set_label("Q9100013", "Like Water for Chocolate")
      .set_label("P161", "cast member")
      .set_label("P31", "instance of")
      .set_label("P57", "director")
      .set_label("P58", "screenwriter");
  return std::move(b).build();
}

inline const char* kFilmQueries[4] = {
    "SELECT ?x WHERE { wd:Q3298576 wdt:P161 ?x . ?x wdt:P31 wd:Q502895 . }",
    "SELECT ?x WHERE { wd:Q3298576 wdt:P57 ?x . ?x wdt:P31 wd:Q502895 . }",
    "ASK { wd:Q76025 wdt:P161 wd:Q24807818 . }",
    "SELECT ?x WHERE { { ?x wdt:P58 wd:Q44426 . ?x wdt:P31 wd:Q838948 . } "
    "UNION { ?x wdt:P58 wd:Q230586 . ?x wdt:P31 wd:Q838948 . } }",
};

inline const char* kFilmUtterances[4] = {
    "Who starred in Mathias Kneissl ?",
    "Who was the director of that work of art ?",
    "Does Dubashi have that person as actor ?",
    "Which works of art are Rainer Werner Fassbinder or Laura Esquivel a screenwriter of ?",
};

inline data::Interaction film_interaction(const kg::KnowledgeGraph& g) {
  data::Interaction it;
  it.id = "film-1";
  const char* types[4] = {"Simple Question (Direct)", "Simple Question (Coref)", "Verification (Boolean)",
                          "Logical Reasoning (Union)"};
  for (int i = 0; i < 4; ++i) {
    data::Turn t;
    t.utterance = kFilmUtterances[i];
    t.sparql = kFilmQueries[i];
    t.answer = sparql::execute(g, sparql::parse_sparql(t.sparql));
    t.question_type = types[i];
    it.turns.push_back(std::move(t));
  }
  return it;
}

// ---- random graphs ------------------------------------------------------

struct RandomGraphSpec {
  std::size_t entities = 60;
  std::size_t relations = 5;
  std::size_t types = 4;
  std::size_t triples = 300;
};

inline kg::KnowledgeGraph random_graph(util::Rng& rng, const RandomGraphSpec& s) {
  kg::KnowledgeGraph::Builder b("P31");
  auto ent = [](std::size_t i) { return "Q" + std::to_string(1000 + i); };
  for (std::size_t i = 0; i < s.entities; ++i)
    if (rng.chance(0.7)) b.add_triple(ent(i), "P31", "Q" + std::to_string(10 + rng.below(s.types)));
  for (std::size_t k = 0; k < s.triples; ++k)
    b.add_triple(ent(rng.below(s.entities)), "P" + std::to_string(100 + rng.below(s.relations)),
                 ent(rng.below(s.entities)));
  return std::move(b).build();
}

// Random SELECT / ASK / COUNT over ?x ?y ?z with constants drawn mostly from
// the graph; about one query in three carries a two-branch UNION.
inline sparql::QueryAst random_query(util::Rng& rng, const kg::KnowledgeGraph& g) {
  using namespace sparql;
  std::vector<std::string> ents, rels;
  for (kg::TermId t = 0; t < g.term_count(); ++t)
    (g.kind(t) == kg::ElementKind::relation ? rels : ents).push_back(g.id(t));
  const char* vars[] = {"x", "y", "z"};
  auto node = [&]() -> Term {
    if (rng.chance(0.55)) return Var{vars[rng.below(3)]};
    if (rng.chance(0.03)) return Iri{Prefix::wd, "Q999999"};
    return Iri{Prefix::wd, rng.pick(ents)};
  };
  auto pred = [&]() -> Term {
    if (rng.chance(0.1)) return Var{vars[rng.below(3)]};
    return Iri{Prefix::wdt, rng.pick(rels)};
  };
  auto group = [&](std::size_t n) {
    Group gr;
    for (std::size_t i = 0; i < n; ++i) gr.elements.push_back(TriplePattern{node(), pred(), node()});
    return gr;
  };
  for (;;) {
    QueryAst q;
    auto form = rng.below(3);
    q.form = form == 0 ? QueryForm::select : form == 1 ? QueryForm::ask : QueryForm::count;
    q.where = group(1 + rng.below(3));
    if (rng.chance(0.35)) {
      UnionBlock u;
      u.branches.push_back(group(1 + rng.below(2)));
      u.branches.push_back(group(1 + rng.below(2)));
      q.where.elements.push_back(std::move(u));
    }
    if (q.form != QueryForm::ask) q.projection = vars[rng.below(3)];
    if (q.form == QueryForm::count) q.count_alias = "count";
    try {
      validate(q);
      return q;
    } catch (const std::exception&) {
    }
  }
}

// ---- nested-loop join oracle ---------------------------------------------

namespace detail {

using Binding = std::map<std::string, std::string>;

inline bool bind(Binding& b, const sparql::Term& t, const std::string& v) {
  if (auto iri = std::get_if<sparql::Iri>(&t)) return iri->id == v;
  auto& name = std::get<sparql::Var>(t).name;
  auto it = b.find(name);
  if (it == b.end()) {
    b.emplace(name, v);
    return true;
  }
  return it->second == v;
}

inline std::vector<Binding> eval(const kg::KnowledgeGraph& g, const sparql::Group& gr, std::vector<Binding> sols) {
  for (const auto& e : gr.elements) {
    std::vector<Binding> next;
    if (auto tp = std::get_if<sparql::TriplePattern>(&e)) {
      for (const auto& b : sols)
        for (const auto& tr : g.triples()) {
          // Check against the current binding first; copy only on success.
          const std::string* vals[3] = {&g.id(tr.subject), &g.id(tr.predicate), &g.id(tr.object)};
          const sparql::Term* terms[3] = {&tp->subject, &tp->predicate, &tp->object};
          bool ok = true;
          for (int k = 0; k < 3 && ok; ++k) {
            if (auto iri = std::get_if<sparql::Iri>(terms[k])) {
              ok = iri->id == *vals[k];
            } else if (auto it = b.find(std::get<sparql::Var>(*terms[k]).name); it != b.end()) {
              ok = it->second == *vals[k];
            }
          }
          if (!ok) continue;
          Binding nb = b;
          if (bind(nb, *terms[0], *vals[0]) && bind(nb, *terms[1], *vals[1]) && bind(nb, *terms[2], *vals[2]))
            next.push_back(std::move(nb));
        }
    } else {
      for (const auto& br : std::get<sparql::UnionBlock>(e).branches) {
        auto part = eval(g, br, sols);
        next.insert(next.end(), part.begin(), part.end());
      }
    }
    sols = std::move(next);
  }
  return sols;
}

}  // namespace detail

inline sparql::Answer oracle_execute(const kg::KnowledgeGraph& g, const sparql::QueryAst& q) {
  auto sols = detail::eval(g, q.where, {detail::Binding{}});
  if (q.form == sparql::QueryForm::ask) return sparql::Answer::boolean(!sols.empty());
  std::set<std::string> vals;
  for (const auto& b : sols)
    if (auto it = b.find(q.projection); it != b.end()) vals.insert(it->second);
  if (q.form == sparql::QueryForm::count) return sparql::Answer::count(vals.size());
  return sparql::Answer::entity_set({vals.begin(), vals.end()});
}

// ---- linker oracle ---------------------------------------------------------

struct SpanHit {
  std::size_t start, end;
  std::string entity;
  friend auto operator<=>(const SpanHit&, const SpanHit&) = default;
};

// Every (span, entity) whose lowercased label tokens occur verbatim in the
// utterance, found by scanning each label separately.
inline std::set<SpanHit> oracle_label_scan(const kg::KnowledgeGraph& g, const std::vector<std::string>& toks) {
  std::set<SpanHit> out;
  for (kg::TermId t = 0; t < g.term_count(); ++t) {
    if (g.kind(t) != kg::ElementKind::entity || !g.labeled(t)) continue;
    auto lab = text::tokenize(g.label(t));
    if (lab.empty() || lab.size() > toks.size()) continue;
    for (std::size_t i = 0; i + lab.size() <= toks.size(); ++i)
      if (std::equal(lab.begin(), lab.end(), toks.begin() + static_cast<std::ptrdiff_t>(i)))
        out.insert({i, i + lab.size(), g.id(t)});
  }
  return out;
}

// The same relation derived from the automaton: each match expands to every
// entity carrying the matched label.
inline std::set<SpanHit> matcher_hits(const kg::KnowledgeGraph& g, const linker::EntityMatcher& m,
                                      const std::vector<std::string>& toks) {
  std::map<std::vector<std::string>, std::vector<std::string>> by_label;
  for (kg::TermId t = 0; t < g.term_count(); ++t)
    if (g.kind(t) == kg::ElementKind::entity && g.labeled(t)) by_label[text::tokenize(g.label(t))].push_back(g.id(t));
  std::set<SpanHit> out;
  for (const auto& mt : m.all_matches(toks)) {
    std::vector<std::string> span(toks.begin() + static_cast<std::ptrdiff_t>(mt.start),
                                  toks.begin() + static_cast<std::ptrdiff_t>(mt.end));
    for (const auto& id : by_label[span]) out.insert({mt.start, mt.end, id});
  }
  return out;
}

// A lexicon of random two-to-three-word names over a small syllable set, so
// that labels overlap and share prefixes and suffixes.
inline kg::KnowledgeGraph random_lexicon(util::Rng& rng, std::size_t labels, std::vector<std::string>* words) {
  static const std::vector<std::string> syll = {"ka", "lo", "mer", "vi", "tan", "os", "ru", "bel"};
  std::vector<std::string> vocab;
  for (auto& a : syll)
    for (auto& b : syll) vocab.push_back(a + b);
  vocab.resize(24);
  kg::KnowledgeGraph::Builder b("P31");
  for (std::size_t i = 0; i < labels; ++i) {
    std::string id = "Q" + std::to_string(5000 + i);
    b.add_triple(id, "P1", "Q1");
    std::string lab;
    auto n = 1 + rng.below(3);
    for (std::size_t k = 0; k < n; ++k) lab += (k ? " " : "") + rng.pick(vocab);
    b.set_label(id, lab);
  }
  if (words) *words = vocab;
  return std::move(b).build();
}

}  // namespace dcg::testing
