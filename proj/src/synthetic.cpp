// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/train/synthetic.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "dcg/sparql/executor.hpp"
#include "dcg/sparql/query.hpp"
#include "dcg/util/rng.hpp"

namespace dcg::train {

namespace {

enum Cls { person, film, city, country, book, company, river, university, band, album, mountain, kClasses };

struct TypeSpec {
  const char* id;
  const char* label;
};

// Index into kTypes.
enum Ty {
  t_person, t_film, t_work, t_city, t_settlement, t_country, t_book, t_literary, t_company,
  t_river, t_university, t_band, t_album, t_mountain, t_organization, kTypeCount
};

constexpr TypeSpec kTypes[kTypeCount] = {
    {"Q5", "person"},         {"Q11424", "film"},          {"Q838948", "work of art"},
    {"Q515", "city"},         {"Q486972", "human settlement"}, {"Q6256", "country"},
    {"Q571", "book"},         {"Q7725634", "literary work"}, {"Q783794", "company"},
    {"Q4022", "river"},       {"Q3918", "university"},     {"Q215380", "band"},
    {"Q482994", "album"},     {"Q8502", "mountain"},       {"Q43229", "organization"},
};

struct ClassSpec {
  std::vector<Ty> types;
  std::size_t count;
};

const ClassSpec kClassSpecs[kClasses] = {
    {{t_person}, 60},
    {{t_film, t_work}, 25},
    {{t_city, t_settlement}, 20},
    {{t_country}, 8},
    {{t_book, t_literary}, 20},
    {{t_company, t_organization}, 12},
    {{t_river}, 10},
    {{t_university, t_organization}, 10},
    {{t_band, t_organization}, 10},
    {{t_album, t_work}, 15},
    {{t_mountain}, 8},
};

struct RelSpec {
  const char* id;
  const char* label;
  std::vector<Cls> subjects;
  Cls object;
  const char* fwd;     // subject given, asks for objects; {t} answer type, {e} subject
  const char* rev;     // object given, asks for subjects
  const char* verify;  // {s} subject, {o} object
};

const std::vector<RelSpec>& relations() {
  static const std::vector<RelSpec> r = {
      {"P57", "director", {film}, person, "which {t} is the director of {e} ?", "which {t} was directed by {e} ?",
       "is {o} the director of {s} ?"},
      {"P161", "cast member", {film}, person, "which {t} starred in {e} ?", "which {t} did {e} star in ?",
       "did {o} star in {s} ?"},
      {"P19", "place of birth", {person}, city, "which {t} was {e} born in ?", "which {t} was born in {e} ?",
       "was {s} born in {o} ?"},
      {"P17", "country", {city, company, river, university, band, mountain}, country,
       "which {t} is the country of {e} ?", "which {t} belongs to the country {e} ?", "is {s} in the country {o} ?"},
      {"P50", "author", {book}, person, "which {t} wrote {e} ?", "which {t} was written by {e} ?",
       "did {o} write {s} ?"},
      {"P123", "publisher", {book}, company, "which {t} published {e} ?", "which {t} was published by {e} ?",
       "did {o} publish {s} ?"},
      {"P159", "headquarters location", {company}, city, "which {t} is the headquarters location of {e} ?",
       "which {t} has its headquarters in {e} ?", "is {s} headquartered in {o} ?"},
      {"P69", "educated at", {person}, university, "which {t} was {e} educated at ?",
       "which {t} was educated at {e} ?", "was {s} educated at {o} ?"},
      {"P131", "located in", {university}, city, "which {t} is {e} located in ?", "which {t} is located in {e} ?",
       "is {s} located in {o} ?"},
      {"P175", "performer", {album}, band, "which {t} performed {e} ?", "which {t} was performed by {e} ?",
       "did {o} perform {s} ?"},
  };
  return r;
}

std::size_t rel_index(const char* id) {
  const auto& rs = relations();
  for (std::size_t i = 0; i < rs.size(); ++i)
    if (std::string(rs[i].id) == id) return i;
  throw std::logic_error("unknown relation");
}

struct ChainSpec {
  const char* r1;
  const char* r2;
  Cls first;  // class of the mentioned entity
  Cls last;   // class of the answers
  const char* text;
};

const std::vector<ChainSpec>& chains() {
  static const std::vector<ChainSpec> c = {
      {"P57", "P19", film, city, "which {t} was the director of {e} born in ?"},
      {"P50", "P19", book, city, "which {t} was the author of {e} born in ?"},
      {"P57", "P69", film, university, "which {t} was the director of {e} educated at ?"},
      {"P123", "P159", book, city, "which {t} is the headquarters location of the publisher of {e} ?"},
      {"P19", "P17", person, country, "which {t} is the country of the place of birth of {e} ?"},
      {"P175", "P17", album, country, "which {t} is the country of the performer of {e} ?"},
      {"P69", "P131", person, city, "which {t} is the university of {e} located in ?"},
  };
  return c;
}

std::string substitute(std::string s, const std::string& key, const std::string& value) {
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
    s.replace(pos, key.size(), value);
  }
  return s;
}

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

using util::Rng;

struct Entity {
  std::string id;
  std::string label;
  Cls cls;
  bool decoy = false;
};

class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng) {
    for (const char* w : {"which", "that", "this", "what", "was", "were", "the", "and", "how", "about", "star",
                          "born", "wrote", "did", "many", "city", "band", "film", "book", "river", "mount",
                          "corp", "live", "land", "country", "person", "album", "work", "art", "star"}) {
      used_.insert(w);
    }
  }
  std::string word() {
    static const std::vector<std::string> syl = {"ka", "ro", "mi", "ten", "vel", "dor", "sa", "lin", "bru", "gan",
                                                 "te", "mor", "ri", "fa", "zel", "nu", "pol", "ver", "ash", "quin",
                                                 "lo", "ban", "cor", "dri", "ela", "fen", "gor", "hal", "ist", "ju",
                                                 "kel", "mav", "nor", "osk", "pra", "sul", "tov", "ul", "vra", "yen"};
    for (;;) {
      std::size_t n = 2 + rng_.below(2);
      std::string w;
      for (std::size_t i = 0; i < n; ++i) w += rng_.pick(syl);
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::unordered_set<std::string> used_;
};

std::string make_label(Cls c, WordMaker& wm, Rng& rng) {
  auto w = [&] { return capitalize(wm.word()); };
  switch (c) {
    case person: return w() + " " + w();
    case film: return rng.chance(0.5) ? w() + " " + w() : "The " + w();
    case city: return w();
    case country: return w() + (rng.chance(0.5) ? "ia" : "land");
    case book: return rng.chance(0.5) ? "The " + w() + " Chronicles" : "Book of " + w();
    case company: return w() + (rng.chance(0.5) ? " Corp" : " Industries");
    case river: return w() + " River";
    case university: return "University of " + w();
    case band: return "The " + w() + " Band";
    case album: return w() + (rng.chance(0.5) ? " Sessions" : " Live");
    case mountain: return "Mount " + w();
    default: break;
  }
  return w();
}

struct Kb {
  kg::KnowledgeGraph g;
  std::vector<Entity> entities;
  std::vector<std::vector<std::size_t>> by_class;  // non-decoy entity indices
  std::unordered_map<std::string, std::size_t> index;
};

Kb build_kb(const SyntheticConfig& cfg, Rng& rng) {
  Kb kb;
  WordMaker wm(rng);
  kg::KnowledgeGraph::Builder b(kInstanceOf);
  b.set_label(kInstanceOf, "instance of");
  for (const auto& t : kTypes) b.set_label(t.id, t.label);
  for (const auto& r : relations()) b.set_label(r.id, r.label);

  std::size_t next_id = 100000;
  kb.by_class.assign(kClasses, {});
  for (int c = 0; c < kClasses; ++c) {
    auto n = std::max<std::size_t>(2, static_cast<std::size_t>(static_cast<double>(kClassSpecs[c].count) * cfg.entity_scale + 0.5));
    for (std::size_t i = 0; i < n; ++i) {
      Entity e{"Q" + std::to_string(next_id++), make_label(static_cast<Cls>(c), wm, rng), static_cast<Cls>(c)};
      kb.by_class[c].push_back(kb.entities.size());
      kb.entities.push_back(std::move(e));
    }
  }
  // Films that share a person's label, as in real KGs.
  for (std::size_t i = 0; i < cfg.ambiguous_labels && i < kb.by_class[person].size(); ++i) {
    const auto& p = kb.entities[kb.by_class[person][rng.below(kb.by_class[person].size())]];
    Entity d{"Q" + std::to_string(next_id++), p.label, film, true};
    kb.entities.push_back(std::move(d));
  }

  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> facts;
  auto fact = [&](std::size_t s, const char* rel, std::size_t o) { facts.insert({s, rel_index(rel), o}); };
  auto any = [&](Cls c) { return kb.by_class[c][rng.below(kb.by_class[c].size())]; };
  auto distinct = [&](Cls c, std::size_t k) {
    auto v = kb.by_class[c];
    rng.shuffle(v);
    v.resize(std::min(k, v.size()));
    return v;
  };
  for (std::size_t i = 0; i < kb.entities.size(); ++i) {
    switch (kb.entities[i].cls) {
      case film:
        fact(i, "P57", any(person));
        for (auto p : distinct(person, 2 + rng.below(3))) fact(i, "P161", p);
        break;
      case person:
        if (rng.chance(0.85)) fact(i, "P19", any(city));
        if (rng.chance(0.5)) fact(i, "P69", any(university));
        break;
      case city:
      case river:
      case mountain:
      case band:
        fact(i, "P17", any(country));
        if (kb.entities[i].cls == river && rng.chance(0.4)) fact(i, "P17", any(country));
        break;
      case company:
        fact(i, "P159", any(city));
        fact(i, "P17", any(country));
        break;
      case university:
        fact(i, "P131", any(city));
        fact(i, "P17", any(country));
        break;
      case book:
        fact(i, "P50", any(person));
        fact(i, "P123", any(company));
        break;
      case album:
        fact(i, "P175", any(band));
        break;
      default:
        break;
    }
  }
  for (const auto& e : kb.entities) {
    b.set_label(e.id, e.label);
    for (auto t : kClassSpecs[e.cls].types) b.add_triple(e.id, kInstanceOf, kTypes[t].id);
  }
  for (const auto& [s, r, o] : facts) b.add_triple(kb.entities[s].id, relations()[r].id, kb.entities[o].id);
  kb.g = std::move(b).build();
  for (std::size_t i = 0; i < kb.entities.size(); ++i) kb.index.emplace(kb.entities[i].id, i);
  return kb;
}

struct Frame {
  std::size_t rel = 0;
  bool forward = true;
  Ty type = t_person;
};

struct TurnMemory {
  std::vector<std::size_t> linked;  // explicitly named entities
  sparql::Answer answer;
  std::optional<std::pair<Frame, std::size_t>> frame;  // ellipsis-able frame and its entity
};

class InteractionMaker {
 public:
  InteractionMaker(const Kb& kb, Rng& rng) : kb_(kb), rng_(rng) {}

  data::Interaction make(const std::string& id, std::size_t turns) {
    data::Interaction it;
    it.id = id;
    mem_.clear();
    while (it.turns.size() < turns) {
      auto t = next_turn();
      if (!t) continue;
      it.turns.push_back(std::move(*t));
    }
    return it;
  }

 private:
  const Entity& ent(std::size_t i) const { return kb_.entities[i]; }
  kg::TermId term(std::size_t i) const { return *kb_.g.find(ent(i).id); }
  kg::TermId rel_term(std::size_t r) const { return *kb_.g.find(relations()[r].id); }

  // Answers of a one-hop frame on entity e, before the type filter.
  std::vector<std::size_t> hop(std::size_t e, std::size_t r, bool forward) const {
    auto ts = forward ? kb_.g.objects(term(e), rel_term(r)) : kb_.g.subjects(rel_term(r), term(e));
    std::vector<std::size_t> out;
    for (auto t : ts) out.push_back(kb_.index.at(kb_.g.id(t)));
    return out;
  }

  std::vector<Ty> answer_types(const std::vector<std::size_t>& answers) const {
    std::set<Ty> s;
    for (auto a : answers)
      for (auto t : kClassSpecs[ent(a).cls].types) s.insert(t);
    return {s.begin(), s.end()};
  }

  static std::string iri(const std::string& id, bool rel) { return (rel ? "wdt:" : "wd:") + id; }

  std::string frame_body(const Frame& f, std::size_t e) const {
    const auto r = iri(relations()[f.rel].id, true);
    std::string core = f.forward ? iri(ent(e).id, false) + " " + r + " ?x . " : "?x " + r + " " + iri(ent(e).id, false) + " . ";
    return core + "?x wdt:P31 " + iri(kTypes[f.type].id, false) + " . ";
  }

  // Frames on entity e whose answer set is non-empty, one per (rel, dir, type).
  std::vector<Frame> frames_for(std::size_t e) const {
    std::vector<Frame> out;
    for (std::size_t r = 0; r < relations().size(); ++r) {
      for (bool fwd : {true, false}) {
        auto ans = hop(e, r, fwd);
        if (ans.empty()) continue;
        for (auto t : answer_types(ans)) out.push_back({r, fwd, t});
      }
    }
    return out;
  }

  std::string frame_text(const Frame& f, const std::string& mention) const {
    const auto& rs = relations()[f.rel];
    return substitute(substitute(f.forward ? rs.fwd : rs.rev, "{t}", kTypes[f.type].label), "{e}", mention);
  }

  std::optional<data::Turn> finish(data::Turn t, const std::string& query, TurnMemory m, bool need_nonempty) {
    auto ast = sparql::parse_sparql(query);
    t.sparql = sparql::serialize(ast);
    t.answer = sparql::execute(kb_.g, ast);
    if (need_nonempty && t.answer.kind == sparql::AnswerKind::entity_set && t.answer.entities.empty()) return std::nullopt;
    m.answer = t.answer;
    mem_.push_back(std::move(m));
    return t;
  }

  std::size_t random_entity_with_frames(std::vector<Frame>& frames) {
    for (;;) {
      auto c = static_cast<Cls>(rng_.below(kClasses));
      const auto& pool = kb_.by_class[c];
      auto e = rng_.pick(pool);
      frames = frames_for(e);
      if (!frames.empty()) return e;
    }
  }

  std::optional<data::Turn> direct(bool count) {
    std::vector<Frame> frames;
    auto e = random_entity_with_frames(frames);
    auto f = rng_.pick(frames);
    data::Turn t;
    t.question_type = count ? qtype::kCount : qtype::kDirect;
    auto text = frame_text(f, ent(e).label);
    if (count) text = "how many" + text.substr(5);
    t.utterance = text;
    TurnMemory m;
    m.linked = {e};
    if (!count) m.frame = {{f, e}};
    auto body = frame_body(f, e);
    auto q = count ? "SELECT (COUNT(?x) AS ?count) WHERE { " + body + "}" : "SELECT ?x WHERE { " + body + "}";
    return finish(std::move(t), q, std::move(m), true);
  }

  std::optional<data::Turn> multihop() {
    const auto& c = rng_.pick(chains());
    auto e = rng_.pick(kb_.by_class[c.first]);
    auto r1 = rel_index(c.r1), r2 = rel_index(c.r2);
    std::set<std::size_t> ans;
    for (auto y : hop(e, r1, true))
      for (auto x : hop(y, r2, true)) ans.insert(x);
    if (ans.empty()) return std::nullopt;
    auto ty = rng_.pick(kClassSpecs[c.last].types);
    data::Turn t;
    t.question_type = qtype::kDirect;
    t.utterance = substitute(substitute(c.text, "{t}", kTypes[ty].label), "{e}", ent(e).label);
    TurnMemory m;
    m.linked = {e};
    auto q = "SELECT ?x WHERE { " + iri(ent(e).id, false) + " " + iri(c.r1, true) + " ?y . ?y " + iri(c.r2, true) +
             " ?x . ?x wdt:P31 " + iri(kTypes[ty].id, false) + " . }";
    return finish(std::move(t), q, std::move(m), true);
  }

  // Picks a coreference target: distance 1 (previous mention or the single
  // previous answer) or 2 (mention two turns back). The type label used in
  // "that <type>" must not fit any other entity still in context.
  struct Referent {
    std::size_t entity;
    Ty type;
    int distance;
  };

  std::optional<Referent> referent(int distance, bool from_answer) {
    if (mem_.size() < static_cast<std::size_t>(distance)) return std::nullopt;
    const auto& prev = mem_[mem_.size() - 1];
    std::vector<std::size_t> context(prev.linked);
    std::vector<std::size_t> prev_answer;
    if (prev.answer.kind == sparql::AnswerKind::entity_set)
      for (const auto& id : prev.answer.entities) prev_answer.push_back(kb_.index.at(id));
    context.insert(context.end(), prev_answer.begin(), prev_answer.end());
    if (mem_.size() >= 2) {
      const auto& pp = mem_[mem_.size() - 2];
      context.insert(context.end(), pp.linked.begin(), pp.linked.end());
    }
    std::vector<std::size_t> pool;
    if (distance == 1 && from_answer) {
      if (prev_answer.size() == 1) pool = prev_answer;
    } else if (distance == 1) {
      pool = prev.linked;
    } else {
      for (auto e : mem_[mem_.size() - 2].linked)
        if (std::find(prev.linked.begin(), prev.linked.end(), e) == prev.linked.end() &&
            std::find(prev_answer.begin(), prev_answer.end(), e) == prev_answer.end())
          pool.push_back(e);
    }
    if (pool.empty()) return std::nullopt;
    auto r = rng_.pick(pool);
    std::vector<Ty> unique_types;
    for (auto ty : kClassSpecs[ent(r).cls].types) {
      bool clash = false;
      for (auto o : context) {
        if (o == r) continue;
        const auto& ot = kClassSpecs[ent(o).cls].types;
        if (std::find(ot.begin(), ot.end(), ty) != ot.end()) clash = true;
      }
      if (!clash) unique_types.push_back(ty);
    }
    if (unique_types.empty()) return std::nullopt;
    return Referent{r, rng_.pick(unique_types), distance};
  }

  static void tag_coref(data::Turn& t, int distance) {
    t.coref_distance = -distance;
    t.phenomena.push_back(distance == 1 ? "coref=-1" : "coref<-1");
  }

  std::optional<data::Turn> coref(int distance, bool from_answer) {
    auto ref = referent(distance, from_answer);
    if (!ref) return std::nullopt;
    auto frames = frames_for(ref->entity);
    if (frames.empty()) return std::nullopt;
    auto f = rng_.pick(frames);
    data::Turn t;
    t.question_type = qtype::kCoref;
    tag_coref(t, distance);
    t.utterance = frame_text(f, std::string("that ") + kTypes[ref->type].label);
    TurnMemory m;
    m.frame = {{f, ref->entity}};
    return finish(std::move(t), "SELECT ?x WHERE { " + frame_body(f, ref->entity) + "}", std::move(m), true);
  }

  std::optional<data::Turn> ellipsis() {
    if (mem_.empty() || !mem_.back().frame) return std::nullopt;
    auto [f, e1] = *mem_.back().frame;
    std::vector<std::size_t> alts;
    for (auto e : kb_.by_class[ent(e1).cls]) {
      if (e == e1) continue;
      auto ans = hop(e, f.rel, f.forward);
      auto tys = answer_types(ans);
      if (std::find(tys.begin(), tys.end(), f.type) != tys.end()) alts.push_back(e);
    }
    if (alts.empty()) return std::nullopt;
    auto e2 = rng_.pick(alts);
    static const std::vector<std::string> forms = {"and how about {e} ?", "what about {e} ?", "and {e} ?"};
    data::Turn t;
    t.question_type = qtype::kEllipsis;
    t.phenomena.push_back("ellipsis");
    t.utterance = substitute(rng_.pick(forms), "{e}", ent(e2).label);
    TurnMemory m;
    m.linked = {e2};
    m.frame = {{f, e2}};
    return finish(std::move(t), "SELECT ?x WHERE { " + frame_body(f, e2) + "}", std::move(m), true);
  }

  std::optional<data::Turn> verification(bool with_coref) {
    std::optional<Referent> ref;
    if (with_coref) {
      ref = referent(1, rng_.chance(0.4));
      if (!ref) return std::nullopt;
    }
    // Relation whose subject or object side fits the fixed entity.
    std::size_t r = rng_.below(relations().size());
    const auto& rs = relations()[r];
    std::size_t s = 0, o = 0;
    bool ref_is_subject = true;
    if (ref) {
      auto cls = ent(ref->entity).cls;
      bool subj_ok = std::find(rs.subjects.begin(), rs.subjects.end(), cls) != rs.subjects.end();
      bool obj_ok = rs.object == cls;
      if (!subj_ok && !obj_ok) return std::nullopt;
      ref_is_subject = subj_ok && (!obj_ok || rng_.chance(0.5));
      if (ref_is_subject) {
        s = ref->entity;
        auto objs = hop(s, r, true);
        if (objs.empty()) return std::nullopt;
        o = rng_.chance(0.5) ? rng_.pick(objs) : rng_.pick(kb_.by_class[rs.object]);
      } else {
        o = ref->entity;
        auto subs = hop(o, r, false);
        if (subs.empty()) return std::nullopt;
        s = rng_.chance(0.5) ? rng_.pick(subs) : rng_.pick(kb_.by_class[rng_.pick(rs.subjects)]);
      }
    } else {
      s = rng_.pick(kb_.by_class[rng_.pick(rs.subjects)]);
      auto objs = hop(s, r, true);
      if (objs.empty()) return std::nullopt;
      o = rng_.chance(0.5) ? rng_.pick(objs) : rng_.pick(kb_.by_class[rs.object]);
    }
    data::Turn t;
    t.question_type = qtype::kVerification;
    TurnMemory m;
    std::string s_text = ent(s).label, o_text = ent(o).label;
    if (ref) {
      tag_coref(t, 1);
      (ref_is_subject ? s_text : o_text) = std::string("that ") + kTypes[ref->type].label;
      m.linked = {ref_is_subject ? o : s};
    } else {
      t.phenomena.push_back("multi-entity");
      m.linked = {s, o};
    }
    t.utterance = substitute(substitute(rs.verify, "{s}", s_text), "{o}", o_text);
    auto q = "ASK { " + iri(ent(s).id, false) + " " + iri(rs.id, true) + " " + iri(ent(o).id, false) + " . }";
    return finish(std::move(t), q, std::move(m), false);
  }

  std::optional<data::Turn> union_turn() {
    std::vector<Frame> frames;
    auto e1 = random_entity_with_frames(frames);
    std::vector<Frame> fwd;
    for (const auto& f : frames)
      if (f.forward) fwd.push_back(f);
    if (fwd.empty()) return std::nullopt;
    auto f = rng_.pick(fwd);
    std::vector<std::size_t> alts;
    for (auto e : kb_.by_class[ent(e1).cls])
      if (e != e1 && !hop(e, f.rel, true).empty()) alts.push_back(e);
    if (alts.empty()) return std::nullopt;
    auto e2 = rng_.pick(alts);
    data::Turn t;
    t.question_type = qtype::kUnion;
    t.phenomena.push_back("multi-entity");
    t.utterance = frame_text(f, ent(e1).label + " or " + ent(e2).label);
    const auto r = iri(relations()[f.rel].id, true);
    auto q = "SELECT ?x WHERE { { " + iri(ent(e1).id, false) + " " + r + " ?x . } UNION { " + iri(ent(e2).id, false) +
             " " + r + " ?x . } ?x wdt:P31 " + iri(kTypes[f.type].id, false) + " . }";
    TurnMemory m;
    m.linked = {e1, e2};
    return finish(std::move(t), q, std::move(m), true);
  }

  std::optional<data::Turn> next_turn() {
    struct Option {
      int kind;
      double weight;
    };
    // kinds: 0 direct, 1 multihop, 2 count, 3 verify, 4 union, 5 coref-1, 6 coref-answer, 7 coref-2,
    // 8 ellipsis, 9 verify with coref
    static const std::vector<Option> first = {{0, 0.35}, {1, 0.25}, {2, 0.15}, {3, 0.12}, {4, 0.18}};
    static const std::vector<Option> later = {{0, 0.10}, {1, 0.12}, {2, 0.06}, {3, 0.05}, {4, 0.10},
                                              {5, 0.15}, {6, 0.08}, {7, 0.13}, {8, 0.14}, {9, 0.08}};
    const auto& opts = mem_.empty() ? first : later;
    double total = 0;
    for (const auto& o : opts) total += o.weight;
    double x = rng_.unit() * total;
    int kind = opts.back().kind;
    for (const auto& o : opts) {
      if (x < o.weight) {
        kind = o.kind;
        break;
      }
      x -= o.weight;
    }
    switch (kind) {
      case 0: return direct(false);
      case 1: return multihop();
      case 2: return direct(true);
      case 3: return verification(false);
      case 4: return union_turn();
      case 5: return coref(1, false);
      case 6: return coref(1, true);
      case 7: return coref(2, false);
      case 8: return ellipsis();
      default: return verification(true);
    }
  }

  const Kb& kb_;
  Rng& rng_;
  std::vector<TurnMemory> mem_;
};

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& cfg) {
  if (cfg.min_turns == 0 || cfg.min_turns > cfg.max_turns) throw std::invalid_argument("invalid turn range");
  Rng kb_rng(cfg.seed);
  auto kb = build_kb(cfg, kb_rng);
  SyntheticCorpus out;
  auto make = [&](std::uint64_t stream, std::size_t n, const std::string& prefix) {
    Rng rng(cfg.seed * 0x9E3779B97F4A7C15ULL + stream);
    InteractionMaker maker(kb, rng);
    std::vector<data::Interaction> v;
    for (std::size_t i = 0; i < n; ++i) {
      auto turns = cfg.min_turns + rng.below(cfg.max_turns - cfg.min_turns + 1);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-%04zu", prefix.c_str(), i);
      v.push_back(maker.make(buf, turns));
    }
    return v;
  };
  out.train = make(1, cfg.interactions, "train");
  out.heldout = make(2, cfg.heldout_interactions, "heldout");
  out.graph = std::move(kb.g);
  return out;
}

void write_synthetic_corpus(const SyntheticCorpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  kg::dump_graph(c.graph, dir / "kg_triples.tsv", dir / "kg_labels.tsv");
  data::write_corpus(dir / "train.jsonl", c.train);
  data::write_corpus(dir / "heldout.jsonl", c.heldout);
}

}  // namespace dcg::train
