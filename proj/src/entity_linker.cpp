// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/linker/entity_linker.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "dcg/sparql/query.hpp"
#include "dcg/text/tokenize.hpp"

namespace dcg::linker {

std::uint64_t PopularityTable::count(const std::string& id) const {
  auto it = counts_.find(id);
  return it == counts_.end() ? 0 : it->second;
}

void PopularityTable::save(const std::filesystem::path& file) const {
  std::vector<std::pair<std::string, std::uint64_t>> rows(counts_.begin(), counts_.end());
  std::sort(rows.begin(), rows.end());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (const auto& [id, n] : rows) out << id << '\t' << n << '\n';
}

PopularityTable PopularityTable::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  PopularityTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": expected id<TAB>count");
    }
    t.counts_[line.substr(0, tab)] = std::stoull(line.substr(tab + 1));
  }
  return t;
}

PopularityTable build_popularity(std::span<const data::Interaction> training) {
  PopularityTable t;
  for (const auto& it : training) {
    for (const auto& turn : it.turns) {
      std::set<std::string> ids;
      try {
        auto q = sparql::parse_sparql(turn.sparql);
        for (auto& c : sparql::constants(q)) ids.insert(std::move(c));
      } catch (const std::exception&) {
        continue;  // unparseable gold parses contribute nothing
      }
      for (const auto& id : ids) t.add(id);
    }
  }
  return t;
}

EntityMatcher::EntityMatcher(const kg::KnowledgeGraph& g) {
  for (kg::TermId t = 0; t < g.term_count(); ++t) {
    if (g.kind(t) != kg::ElementKind::entity || !g.labeled(t)) continue;
    auto toks = text::tokenize(g.label(t));
    if (toks.empty()) continue;
    auto p = automaton_.add(toks);
    if (p >= entities_.size()) entities_.resize(p + 1);
    entities_[p].push_back(g.id(t));
  }
  automaton_.build();
}

EntityMatcher build_lexicon(const kg::KnowledgeGraph& g) { return EntityMatcher(g); }

std::vector<TokenAutomaton::Match> leftmost_longest(std::vector<TokenAutomaton::Match> matches) {
  std::sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.end > b.end;
  });
  std::vector<TokenAutomaton::Match> out;
  std::size_t covered = 0;
  for (const auto& m : matches) {
    if (m.start < covered) continue;
    out.push_back(m);
    covered = m.end;
  }
  return out;
}

namespace {

void order_candidates(std::vector<std::string>& c, const PopularityTable* pop) {
  std::sort(c.begin(), c.end(), [&](const std::string& a, const std::string& b) {
    if (pop) {
      auto ca = pop->count(a), cb = pop->count(b);
      if (ca != cb) return ca > cb;
    }
    return a < b;
  });
}

}  // namespace

std::vector<MentionSpan> EntityMatcher::find_mentions(std::span<const std::string> tokens,
                                                      const PopularityTable* pop) const {
  std::vector<MentionSpan> out;
  for (const auto& m : leftmost_longest(automaton_.find_all(tokens))) {
    MentionSpan span;
    span.start = m.start;
    span.end = m.end;
    span.surface = text::join({tokens.begin() + m.start, tokens.begin() + m.end});
    span.candidates = entities_[m.pattern];
    order_candidates(span.candidates, pop);
    out.push_back(std::move(span));
  }
  return out;
}

std::string disambiguate(const MentionSpan& span, const PopularityTable& pop) {
  if (span.candidates.empty()) throw std::invalid_argument("mention without candidates");
  auto c = span.candidates;
  order_candidates(c, &pop);
  return c.front();
}

std::vector<std::string> top_k(const MentionSpan& span, const PopularityTable& pop, std::size_t k) {
  auto c = span.candidates;
  order_candidates(c, &pop);
  if (k > 0 && c.size() > k) c.resize(k);
  return c;
}

}  // namespace dcg::linker
