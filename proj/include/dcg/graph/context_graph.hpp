// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Per-turn context subgraphs. A triple (s, r, o) is encoded as two directed
// edges s -> r -> o, so relations are nodes just like entities and types.

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dcg/kg/knowledge_graph.hpp"
#include "dcg/sparql/answer.hpp"

namespace dcg::graph {

// Higher value wins when the same element arrives with different origins;
// eviction removes the lowest first.
enum class Origin : std::uint8_t { carryover = 0, type_link = 1, ent_hop = 2 };

std::string_view to_string(Origin o);

struct SubgraphNode {
  std::string element;  // KG id
  kg::ElementKind node_class = kg::ElementKind::entity;
  std::string label;
  std::vector<std::string> label_tokens;
  Origin origin = Origin::ent_hop;
};

class ContextSubgraph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  const std::vector<SubgraphNode>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }  // sorted, unique
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  std::optional<std::uint32_t> index_of(const std::string& element) const;
  bool contains(const std::string& element) const { return index_of(element).has_value(); }

  // Adds the node if absent, otherwise upgrades its origin. Returns its index.
  std::uint32_t add_node(const kg::KnowledgeGraph& g, kg::TermId t, Origin origin);
  std::uint32_t add_node(SubgraphNode node);
  void add_edge(std::uint32_t src, std::uint32_t dst);
  void add_triple(const kg::KnowledgeGraph& g, kg::TermId s, kg::TermId r, kg::TermId o, Origin origin);

  // Drops the given nodes and their edges; remaining nodes are renumbered
  // densely in their existing order.
  void remove_nodes(const std::vector<bool>& drop);

  void set_origin(Origin o);

 private:
  std::vector<SubgraphNode> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

class MergedGraphTooLarge : public std::runtime_error {
 public:
  MergedGraphTooLarge(std::size_t nodes, std::size_t cap);
};

inline constexpr std::size_t kDefaultNodeCap = 512;
inline constexpr std::size_t kAnswerCarryover = 10;

// One row of the two-hop type expansion that survived pruning, with the
// utterance tokens that justified keeping it.
struct TypeLinkRow {
  kg::Triple triple;       // (entity, r1, t1) or (t1, r2, t2)
  kg::TermId neighbor;     // n1 or n2
  kg::TermId type;         // t1 or t2
  int hop = 1;
  std::vector<std::string> shared_tokens;
};

// Typed one-hop neighborhood of each entity: the far endpoint of every
// incident triple is replaced by each of its types, or kept when untyped.
ContextSubgraph entity_subgraph(const kg::KnowledgeGraph& g, std::span<const kg::TermId> entities);

std::vector<TypeLinkRow> type_link_rows(const kg::KnowledgeGraph& g, std::span<const kg::TermId> entities,
                                        std::span<const std::string> utterance);

ContextSubgraph type_link_subgraph(const kg::KnowledgeGraph& g, std::span<const kg::TermId> entities,
                                   std::span<const std::string> utterance);

// Node union by element id, edge union, highest-priority origin per node.
// Nodes are numbered by first appearance across `gs` in order. When the
// result exceeds `cap`, carryover then type_link nodes are evicted (latest
// first); if ent_hop nodes alone exceed it, MergedGraphTooLarge is thrown.
ContextSubgraph merge(std::span<const ContextSubgraph> gs, std::size_t cap = kDefaultNodeCap);

struct TurnContext {
  std::size_t t_max = 5;
  std::deque<ContextSubgraph> window;  // most recent first
  std::vector<std::string> prev_utterance;
  std::optional<sparql::Answer> prev_answer;

  void advance(ContextSubgraph current, std::vector<std::string> utterance, sparql::Answer answer);
};

struct TurnGraphOptions {
  bool type_linking = true;
  std::size_t node_cap = kDefaultNodeCap;
};

struct TurnGraph {
  ContextSubgraph current;  // G_t
  ContextSubgraph merged;   // G_t merged with the window and answer carryover
};

TurnGraph build_turn_graph(const kg::KnowledgeGraph& g, const TurnContext& ctx,
                           std::span<const std::string> utterance, std::span<const kg::TermId> linked,
                           const TurnGraphOptions& opts = {});

nlohmann::json snapshot(const ContextSubgraph& sg);

}  // namespace dcg::graph
