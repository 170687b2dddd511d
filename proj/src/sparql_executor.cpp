// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/sparql/executor.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace dcg::sparql {

std::string_view to_string(AnswerKind k) {
  switch (k) {
    case AnswerKind::entity_set: return "entity_set";
    case AnswerKind::boolean: return "boolean";
    case AnswerKind::count: return "count";
  }
  return "entity_set";
}

AnswerKind answer_kind_from_string(std::string_view s) {
  if (s == "entity_set") return AnswerKind::entity_set;
  if (s == "boolean") return AnswerKind::boolean;
  if (s == "count") return AnswerKind::count;
  throw std::invalid_argument("unknown answer kind '" + std::string(s) + "'");
}

Answer Answer::entity_set(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Answer a;
  a.kind = AnswerKind::entity_set;
  a.entities = std::move(ids);
  return a;
}

Answer Answer::boolean(bool b) {
  Answer a;
  a.kind = AnswerKind::boolean;
  a.truth = b;
  return a;
}

Answer Answer::count(std::uint64_t n) {
  Answer a;
  a.kind = AnswerKind::count;
  a.value = n;
  return a;
}

namespace {

using kg::kNoTerm;
using kg::TermId;
using Binding = std::vector<TermId>;

// A pattern position after resolving constants: either a fixed term, a
// variable slot, or a constant absent from the graph.
struct Slot {
  bool is_var = false;
  int var = -1;
  TermId term = kNoTerm;
  bool missing = false;
};

struct Compiled {
  Slot s, p, o;
};

class Evaluator {
 public:
  Evaluator(const kg::KnowledgeGraph& g, const QueryAst& q) : g_(g) {
    vars_ = variables(q);
  }

  int slot_of(const std::string& name) const {
    auto it = std::find(vars_.begin(), vars_.end(), name);
    return it == vars_.end() ? -1 : static_cast<int>(it - vars_.begin());
  }

  std::size_t var_count() const { return vars_.size(); }

  Slot resolve(const Term& t) const {
    Slot s;
    if (auto v = std::get_if<Var>(&t)) {
      s.is_var = true;
      s.var = slot_of(v->name);
    } else {
      auto id = g_.find(std::get<Iri>(t).id);
      if (id) s.term = *id;
      else s.missing = true;
    }
    return s;
  }

  std::vector<Binding> eval(const Group& group, std::vector<Binding> sols) const {
    std::vector<Compiled> patterns;
    std::vector<const UnionBlock*> unions;
    for (const auto& e : group.elements) {
      if (auto tp = std::get_if<TriplePattern>(&e)) {
        Compiled c{resolve(tp->subject), resolve(tp->predicate), resolve(tp->object)};
        if (c.s.missing || c.p.missing || c.o.missing) return {};
        patterns.push_back(c);
      } else {
        unions.push_back(&std::get<UnionBlock>(e));
      }
    }

    // Statically bound variables: anything bound in every incoming solution.
    std::vector<bool> bound(var_count(), false);
    if (!sols.empty()) {
      for (std::size_t v = 0; v < var_count(); ++v) {
        bound[v] = std::all_of(sols.begin(), sols.end(), [&](const Binding& b) { return b[v] != kNoTerm; });
      }
    }

    std::vector<bool> used(patterns.size(), false);
    for (std::size_t step = 0; step < patterns.size() && !sols.empty(); ++step) {
      std::size_t best = patterns.size();
      int best_score = -1;
      for (std::size_t i = 0; i < patterns.size(); ++i) {
        if (used[i]) continue;
        int score = fixed(patterns[i].s, bound) + fixed(patterns[i].p, bound) + fixed(patterns[i].o, bound);
        if (score > best_score) {
          best_score = score;
          best = i;
        }
      }
      used[best] = true;
      sols = extend(patterns[best], sols);
      for (const Slot* sl : {&patterns[best].s, &patterns[best].p, &patterns[best].o}) {
        if (sl->is_var) bound[sl->var] = true;
      }
    }

    for (const UnionBlock* u : unions) {
      if (sols.empty()) break;
      std::vector<Binding> merged;
      for (const auto& branch : u->branches) {
        auto part = eval(branch, sols);
        merged.insert(merged.end(), part.begin(), part.end());
      }
      std::sort(merged.begin(), merged.end());
      merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
      sols = std::move(merged);
    }
    return sols;
  }

 private:
  static int fixed(const Slot& s, const std::vector<bool>& bound) {
    return (!s.is_var || bound[s.var]) ? 1 : 0;
  }

  static std::optional<TermId> value(const Slot& s, const Binding& b) {
    if (!s.is_var) return s.term;
    if (b[s.var] != kNoTerm) return b[s.var];
    return std::nullopt;
  }

  static bool unify(const Slot& s, TermId t, Binding& b) {
    if (!s.is_var) return s.term == t;
    if (b[s.var] == kNoTerm) {
      b[s.var] = t;
      return true;
    }
    return b[s.var] == t;
  }

  std::vector<kg::Triple> candidates(std::optional<TermId> s, std::optional<TermId> p,
                                     std::optional<TermId> o) const {
    std::vector<kg::Triple> out;
    if (s && p && o) {
      if (g_.contains(*s, *p, *o)) out.push_back({*s, *p, *o});
    } else if (s && p) {
      for (auto x : g_.objects(*s, *p)) out.push_back({*s, *p, x});
    } else if (p && o) {
      for (auto x : g_.subjects(*p, *o)) out.push_back({x, *p, *o});
    } else if (s) {
      out = g_.outgoing(*s);
    } else if (o) {
      out = g_.incoming(*o);
    } else if (p) {
      out = g_.with_predicate(*p);
    } else {
      auto all = g_.triples();
      out.assign(all.begin(), all.end());
    }
    return out;
  }

  std::vector<Binding> extend(const Compiled& c, const std::vector<Binding>& sols) const {
    std::vector<Binding> out;
    for (const auto& b : sols) {
      for (const auto& t : candidates(value(c.s, b), value(c.p, b), value(c.o, b))) {
        Binding nb = b;
        if (unify(c.s, t.subject, nb) && unify(c.p, t.predicate, nb) && unify(c.o, t.object, nb)) {
          out.push_back(std::move(nb));
        }
      }
    }
    return out;
  }

  const kg::KnowledgeGraph& g_;
  std::vector<std::string> vars_;
};

}  // namespace

Answer execute(const kg::KnowledgeGraph& g, const QueryAst& q) {
  validate(q);
  Evaluator ev(g, q);
  std::vector<Binding> start{Binding(ev.var_count(), kNoTerm)};
  auto sols = ev.eval(q.where, std::move(start));

  if (q.form == QueryForm::ask) return Answer::boolean(!sols.empty());

  int slot = ev.slot_of(q.projection);
  std::vector<TermId> vals;
  for (const auto& b : sols) {
    if (b[slot] != kNoTerm) vals.push_back(b[slot]);
  }
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  if (q.form == QueryForm::count) return Answer::count(vals.size());

  std::vector<std::string> ids;
  ids.reserve(vals.size());
  for (auto v : vals) ids.push_back(g.id(v));
  return Answer::entity_set(std::move(ids));
}

}  // namespace dcg::sparql
