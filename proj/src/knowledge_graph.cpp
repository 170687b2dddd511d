// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/kg/knowledge_graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "dcg/text/tokenize.hpp"

namespace dcg::kg {

std::string_view to_string(ElementKind k) {
  switch (k) {
    case ElementKind::entity: return "entity";
    case ElementKind::relation: return "relation";
    case ElementKind::type: return "type";
  }
  return "entity";
}

KgFormatError::KgFormatError(const std::string& file, std::size_t line, const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::string unlabeled_placeholder(std::string_view id) {
  return "⟨unlabeled:" + std::string(id) + "⟩";
}

// ---------------------------------------------------------------------------
// Builder

KnowledgeGraph::Builder::Builder(std::string instance_of_id)
    : instance_of_(std::move(instance_of_id)) {
  if (instance_of_.empty()) throw std::invalid_argument("instance-of relation id is empty");
  intern(instance_of_);
}

TermId KnowledgeGraph::Builder::intern(std::string_view id) {
  if (id.empty()) throw std::invalid_argument("empty element id");
  auto [it, inserted] = index_.try_emplace(std::string(id), static_cast<TermId>(ids_.size()));
  if (inserted) {
    ids_.emplace_back(id);
    labels_.emplace_back();
  }
  return it->second;
}

KnowledgeGraph::Builder& KnowledgeGraph::Builder::add_triple(std::string_view s, std::string_view p,
                                                             std::string_view o) {
  Triple t{intern(s), intern(p), intern(o)};
  triples_.push_back(t);
  return *this;
}

KnowledgeGraph::Builder& KnowledgeGraph::Builder::set_label(std::string_view id,
                                                            std::string_view label) {
  labels_[intern(id)] = std::string(label);
  return *this;
}

KnowledgeGraph KnowledgeGraph::Builder::build() && {
  KnowledgeGraph g;
  const std::size_t n = ids_.size();
  g.ids_ = std::move(ids_);
  g.index_ = std::move(index_);
  g.instance_of_ = g.index_.at(instance_of_);

  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
  g.triples_ = std::move(triples_);

  g.kinds_.assign(n, ElementKind::entity);
  for (const auto& t : g.triples_) {
    if (t.predicate == g.instance_of_) g.kinds_[t.object] = ElementKind::type;
  }
  for (const auto& t : g.triples_) g.kinds_[t.predicate] = ElementKind::relation;
  g.kinds_[g.instance_of_] = ElementKind::relation;

  g.labels_.resize(n);
  g.labeled_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels_[i]) {
      g.labels_[i] = *labels_[i];
      g.labeled_[i] = 1;
    } else {
      g.labels_[i] = unlabeled_placeholder(g.ids_[i]);
    }
  }

  g.by_subject_.resize(n);
  g.by_object_.resize(n);
  for (std::uint32_t i = 0; i < g.triples_.size(); ++i) {
    const auto& t = g.triples_[i];
    g.by_subject_[t.subject].push_back(i);
    g.by_object_[t.object].push_back(i);
    g.sp_objects_[key(t.subject, t.predicate)].push_back(t.object);
    g.po_subjects_[key(t.predicate, t.object)].push_back(t.subject);
    g.by_predicate_[t.predicate].push_back(i);
  }
  for (auto& [k, v] : g.po_subjects_) std::sort(v.begin(), v.end());

  for (TermId i = 0; i < n; ++i) {
    if (!g.labeled_[i]) continue;
    std::set<std::string> seen;
    for (auto& tok : text::tokenize(g.labels_[i])) {
      if (seen.insert(tok).second) g.label_tokens_[tok].push_back(i);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Lookups

std::optional<TermId> KnowledgeGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

GraphCounts KnowledgeGraph::counts() const {
  GraphCounts c;
  c.triples = triples_.size();
  for (auto k : kinds_) {
    switch (k) {
      case ElementKind::entity: ++c.entities; break;
      case ElementKind::relation: ++c.relations; break;
      case ElementKind::type: ++c.types; break;
    }
  }
  return c;
}

std::vector<Triple> KnowledgeGraph::outgoing(TermId t) const {
  std::vector<Triple> out;
  if (t >= by_subject_.size()) return out;
  for (auto i : by_subject_[t]) out.push_back(triples_[i]);
  return out;
}

std::vector<Triple> KnowledgeGraph::incoming(TermId t) const {
  std::vector<Triple> out;
  if (t >= by_object_.size()) return out;
  for (auto i : by_object_[t]) out.push_back(triples_[i]);
  return out;
}

std::vector<Triple> KnowledgeGraph::neighborhood(TermId t) const {
  std::vector<Triple> out;
  if (t >= by_subject_.size()) return out;
  std::vector<std::uint32_t> idx = by_subject_[t];
  idx.insert(idx.end(), by_object_[t].begin(), by_object_[t].end());
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(triples_[i]);
  return out;
}

std::vector<Triple> KnowledgeGraph::neighborhood(std::string_view id) const {
  auto t = find(id);
  if (!t) return {};
  return neighborhood(*t);
}

std::span<const TermId> KnowledgeGraph::lookup(
    const std::unordered_map<std::uint64_t, std::vector<TermId>>& m, TermId a, TermId b) const {
  auto it = m.find(key(a, b));
  if (it == m.end()) return {};
  return it->second;
}

std::span<const TermId> KnowledgeGraph::objects(TermId s, TermId p) const {
  return lookup(sp_objects_, s, p);
}

std::span<const TermId> KnowledgeGraph::subjects(TermId p, TermId o) const {
  return lookup(po_subjects_, p, o);
}

std::vector<Triple> KnowledgeGraph::with_predicate(TermId p) const {
  std::vector<Triple> out;
  auto it = by_predicate_.find(p);
  if (it == by_predicate_.end()) return out;
  out.reserve(it->second.size());
  for (auto i : it->second) out.push_back(triples_[i]);
  return out;
}

bool KnowledgeGraph::contains(TermId s, TermId p, TermId o) const {
  return std::binary_search(triples_.begin(), triples_.end(), Triple{s, p, o});
}

std::span<const TermId> KnowledgeGraph::types_of(TermId t) const {
  return objects(t, instance_of_);
}

std::vector<TermId> KnowledgeGraph::types_of(std::string_view id) const {
  auto t = find(id);
  if (!t) return {};
  auto s = types_of(*t);
  return {s.begin(), s.end()};
}

std::span<const TermId> KnowledgeGraph::terms_with_label_token(std::string_view token) const {
  auto it = label_tokens_.find(std::string(token));
  if (it == label_tokens_.end()) return {};
  return it->second;
}

// ---------------------------------------------------------------------------
// File IO

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  auto first = line.find_first_not_of(" \t");
  return first == std::string_view::npos || line[first] == '#';
}

}  // namespace

KnowledgeGraph load_graph(const std::filesystem::path& triples_file,
                          const std::filesystem::path& labels_file,
                          std::string_view instance_of_id) {
  KnowledgeGraph::Builder b{std::string(instance_of_id)};

  std::ifstream tin(triples_file);
  if (!tin) throw std::runtime_error("cannot open triples file " + triples_file.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(tin, line)) {
    ++lineno;
    std::string_view sv = strip_cr(line);
    if (skippable(sv)) continue;
    auto cols = split_tabs(sv);
    if (cols.size() != 3) {
      throw KgFormatError(triples_file.string(), lineno,
                          "expected 3 tab-separated columns, got " + std::to_string(cols.size()));
    }
    for (auto c : cols) {
      if (c.empty()) throw KgFormatError(triples_file.string(), lineno, "empty column");
    }
    b.add_triple(cols[0], cols[1], cols[2]);
  }

  std::ifstream lin(labels_file);
  if (!lin) throw std::runtime_error("cannot open labels file " + labels_file.string());
  lineno = 0;
  while (std::getline(lin, line)) {
    ++lineno;
    std::string_view sv = strip_cr(line);
    if (skippable(sv)) continue;
    auto tab = sv.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw KgFormatError(labels_file.string(), lineno, "expected id<TAB>label");
    }
    b.set_label(sv.substr(0, tab), sv.substr(tab + 1));
  }
  return std::move(b).build();
}

void dump_graph(const KnowledgeGraph& g, const std::filesystem::path& triples_file,
                const std::filesystem::path& labels_file) {
  std::vector<std::tuple<std::string, std::string, std::string>> rows;
  rows.reserve(g.triples().size());
  for (const auto& t : g.triples()) rows.emplace_back(g.id(t.subject), g.id(t.predicate), g.id(t.object));
  std::sort(rows.begin(), rows.end());
  std::ofstream tout(triples_file);
  if (!tout) throw std::runtime_error("cannot write " + triples_file.string());
  for (const auto& [s, p, o] : rows) tout << s << '\t' << p << '\t' << o << '\n';

  std::vector<std::pair<std::string, std::string>> labels;
  for (TermId i = 0; i < g.term_count(); ++i) {
    if (g.labeled(i)) labels.emplace_back(g.id(i), g.label(i));
  }
  std::sort(labels.begin(), labels.end());
  std::ofstream lout(labels_file);
  if (!lout) throw std::runtime_error("cannot write " + labels_file.string());
  for (const auto& [id, label] : labels) lout << id << '\t' << label << '\n';
}

}  // namespace dcg::kg
