// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/graph/context_graph.hpp"

#include <algorithm>
#include <set>

#include "dcg/text/tokenize.hpp"

namespace dcg::graph {

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::ent_hop: return "ent_hop";
    case Origin::type_link: return "type_link";
    case Origin::carryover: return "carryover";
  }
  return "carryover";
}

MergedGraphTooLarge::MergedGraphTooLarge(std::size_t nodes, std::size_t cap)
    : std::runtime_error("merged context graph has " + std::to_string(nodes) +
                         " entity-hop nodes, cap is " + std::to_string(cap)) {}

// ---------------------------------------------------------------------------
// ContextSubgraph

std::optional<std::uint32_t> ContextSubgraph::index_of(const std::string& element) const {
  auto it = index_.find(element);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t ContextSubgraph::add_node(SubgraphNode node) {
  auto it = index_.find(node.element);
  if (it != index_.end()) {
    auto& existing = nodes_[it->second];
    existing.origin = std::max(existing.origin, node.origin);
    return it->second;
  }
  auto id = static_cast<std::uint32_t>(nodes_.size());
  if (node.label_tokens.empty()) node.label_tokens = {node.element};
  index_.emplace(node.element, id);
  nodes_.push_back(std::move(node));
  return id;
}

std::uint32_t ContextSubgraph::add_node(const kg::KnowledgeGraph& g, kg::TermId t, Origin origin) {
  SubgraphNode n;
  n.element = g.id(t);
  n.node_class = g.kind(t);
  n.label = g.label(t);
  n.label_tokens = text::tokenize(n.label);
  n.origin = origin;
  return add_node(std::move(n));
}

void ContextSubgraph::add_edge(std::uint32_t src, std::uint32_t dst) {
  if (src >= nodes_.size() || dst >= nodes_.size()) throw std::out_of_range("edge endpoint out of range");
  Edge e{src, dst};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) edges_.insert(it, e);
}

void ContextSubgraph::add_triple(const kg::KnowledgeGraph& g, kg::TermId s, kg::TermId r, kg::TermId o,
                                 Origin origin) {
  auto si = add_node(g, s, origin);
  auto ri = add_node(g, r, origin);
  auto oi = add_node(g, o, origin);
  add_edge(si, ri);
  add_edge(ri, oi);
}

void ContextSubgraph::remove_nodes(const std::vector<bool>& drop) {
  std::vector<std::uint32_t> remap(nodes_.size(), static_cast<std::uint32_t>(-1));
  std::vector<SubgraphNode> kept;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (i < drop.size() && drop[i]) continue;
    remap[i] = static_cast<std::uint32_t>(kept.size());
    kept.push_back(std::move(nodes_[i]));
  }
  std::vector<Edge> edges;
  for (auto [s, d] : edges_) {
    if (remap[s] == static_cast<std::uint32_t>(-1) || remap[d] == static_cast<std::uint32_t>(-1)) continue;
    edges.emplace_back(remap[s], remap[d]);
  }
  std::sort(edges.begin(), edges.end());
  nodes_ = std::move(kept);
  edges_ = std::move(edges);
  index_.clear();
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].element, i);
}

void ContextSubgraph::set_origin(Origin o) {
  for (auto& n : nodes_) n.origin = o;
}

// ---------------------------------------------------------------------------
// Construction

ContextSubgraph entity_subgraph(const kg::KnowledgeGraph& g, std::span<const kg::TermId> entities) {
  ContextSubgraph sg;
  for (auto e : entities) {
    sg.add_node(g, e, Origin::ent_hop);
    for (const auto& t : g.neighborhood(e)) {
      if (t.subject == e) {
        auto types = g.types_of(t.object);
        if (types.empty()) {
          sg.add_triple(g, e, t.predicate, t.object, Origin::ent_hop);
        } else {
          for (auto ty : types) sg.add_triple(g, e, t.predicate, ty, Origin::ent_hop);
        }
      } else {
        auto types = g.types_of(t.subject);
        if (types.empty()) {
          sg.add_triple(g, t.subject, t.predicate, e, Origin::ent_hop);
        } else {
          for (auto ty : types) sg.add_triple(g, ty, t.predicate, e, Origin::ent_hop);
        }
      }
    }
  }
  return sg;
}

namespace {

std::vector<std::string> shared_tokens(const kg::KnowledgeGraph& g, kg::TermId neighbor, kg::TermId type,
                                       const std::set<std::string>& utt) {
  std::set<std::string> out;
  for (kg::TermId t : {neighbor, type}) {
    if (!g.labeled(t)) continue;
    for (auto& tok : text::content_tokens(g.label(t))) {
      if (utt.contains(tok)) out.insert(tok);
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace

std::vector<TypeLinkRow> type_link_rows(const kg::KnowledgeGraph& g, std::span<const kg::TermId> entities,
                                        std::span<const std::string> utterance) {
  std::set<std::string> utt;
  for (const auto& tok : utterance) {
    for (auto& c : text::content_tokens(tok)) utt.insert(std::move(c));
  }
  std::vector<TypeLinkRow> rows;
  if (utt.empty()) return rows;
  for (auto e : entities) {
    for (const auto& first : g.outgoing(e)) {
      auto n1 = first.object;
      auto t1s = g.types_of(n1);
      if (t1s.empty()) continue;
      for (auto t1 : t1s) {
        auto shared = shared_tokens(g, n1, t1, utt);
        if (!shared.empty()) rows.push_back({{e, first.predicate, t1}, n1, t1, 1, std::move(shared)});
      }
      for (const auto& second : g.outgoing(n1)) {
        auto n2 = second.object;
        for (auto t2 : g.types_of(n2)) {
          auto shared = shared_tokens(g, n2, t2, utt);
          if (shared.empty()) continue;
          for (auto t1 : t1s) rows.push_back({{t1, second.predicate, t2}, n2, t2, 2, shared});
        }
      }
    }
  }
  return rows;
}

ContextSubgraph type_link_subgraph(const kg::KnowledgeGraph& g, std::span<const kg::TermId> entities,
                                   std::span<const std::string> utterance) {
  ContextSubgraph sg;
  for (const auto& row : type_link_rows(g, entities, utterance)) {
    sg.add_triple(g, row.triple.subject, row.triple.predicate, row.triple.object, Origin::type_link);
  }
  return sg;
}

ContextSubgraph merge(std::span<const ContextSubgraph> gs, std::size_t cap) {
  ContextSubgraph out;
  for (const auto& sg : gs) {
    std::vector<std::uint32_t> remap(sg.size());
    for (std::size_t i = 0; i < sg.size(); ++i) remap[i] = out.add_node(sg.nodes()[i]);
    for (auto [s, d] : sg.edges()) out.add_edge(remap[s], remap[d]);
  }
  if (out.size() <= cap) return out;

  std::vector<bool> drop(out.size(), false);
  std::size_t excess = out.size() - cap;
  for (Origin level : {Origin::carryover, Origin::type_link}) {
    for (std::size_t i = out.size(); i-- > 0 && excess > 0;) {
      if (out.nodes()[i].origin == level) {
        drop[i] = true;
        --excess;
      }
    }
  }
  if (excess > 0) throw MergedGraphTooLarge(cap + excess, cap);
  out.remove_nodes(drop);
  return out;
}

void TurnContext::advance(ContextSubgraph current, std::vector<std::string> utterance,
                          sparql::Answer answer) {
  prev_utterance = std::move(utterance);
  prev_answer = std::move(answer);
  if (t_max == 0) {
    window.clear();
    return;
  }
  window.push_front(std::move(current));
  while (window.size() > t_max) window.pop_back();
}

TurnGraph build_turn_graph(const kg::KnowledgeGraph& g, const TurnContext& ctx,
                           std::span<const std::string> utterance, std::span<const kg::TermId> linked,
                           const TurnGraphOptions& opts) {
  std::vector<ContextSubgraph> parts;
  parts.push_back(entity_subgraph(g, linked));
  if (opts.type_linking) parts.push_back(type_link_subgraph(g, linked, utterance));

  TurnGraph tg;
  tg.current = merge(parts, static_cast<std::size_t>(-1));

  std::vector<ContextSubgraph> all{tg.current};
  if (ctx.t_max > 0) {
    for (const auto& w : ctx.window) {
      ContextSubgraph carried = w;
      carried.set_origin(Origin::carryover);
      all.push_back(std::move(carried));
    }
    if (ctx.prev_answer && ctx.prev_answer->kind == sparql::AnswerKind::entity_set) {
      ContextSubgraph answers;
      std::size_t n = 0;
      for (const auto& id : ctx.prev_answer->entities) {
        if (n == kAnswerCarryover) break;
        if (auto t = g.find(id)) {
          answers.add_node(g, *t, Origin::carryover);
          ++n;
        }
      }
      all.push_back(std::move(answers));
    }
  }
  tg.merged = merge(all, opts.node_cap);
  return tg;
}

nlohmann::json snapshot(const ContextSubgraph& sg) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < sg.size(); ++i) {
    const auto& n = sg.nodes()[i];
    nodes.push_back({{"id", n.element},
                     {"index", i},
                     {"label", n.label},
                     {"class", kg::to_string(n.node_class)},
                     {"origin", to_string(n.origin)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (auto [s, d] : sg.edges()) edges.push_back({s, d});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

}  // namespace dcg::graph
