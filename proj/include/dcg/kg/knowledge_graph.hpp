// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// In-memory triple store with the lookups needed by entity linking,
// subgraph extraction and query execution. Identifiers are interned to
// dense TermIds; the graph is immutable once built.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dcg::kg {

using TermId = std::uint32_t;
inline constexpr TermId kNoTerm = static_cast<TermId>(-1);

enum class ElementKind : std::uint8_t { entity, relation, type };

std::string_view to_string(ElementKind k);

struct ElementId {
  ElementKind kind = ElementKind::entity;
  std::string id;

  friend bool operator==(const ElementId&, const ElementId&) = default;
};

struct Triple {
  TermId subject = kNoTerm;
  TermId predicate = kNoTerm;
  TermId object = kNoTerm;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

class KgFormatError : public std::runtime_error {
 public:
  KgFormatError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct GraphCounts {
  std::size_t triples = 0;
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t types = 0;
};

class KnowledgeGraph {
 public:
  class Builder {
   public:
    explicit Builder(std::string instance_of_id);
    Builder& add_triple(std::string_view s, std::string_view p, std::string_view o);
    Builder& set_label(std::string_view id, std::string_view label);
    KnowledgeGraph build() &&;

   private:
    TermId intern(std::string_view id);

    std::string instance_of_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, TermId> index_;
    std::vector<std::optional<std::string>> labels_;
    std::vector<Triple> triples_;
  };

  KnowledgeGraph() = default;

  std::size_t term_count() const { return ids_.size(); }
  std::optional<TermId> find(std::string_view id) const;
  const std::string& id(TermId t) const { return ids_.at(t); }
  const std::string& label(TermId t) const { return labels_.at(t); }
  bool labeled(TermId t) const { return labeled_.at(t) != 0; }
  ElementKind kind(TermId t) const { return kinds_.at(t); }
  ElementId element(TermId t) const { return {kind(t), id(t)}; }
  TermId instance_of() const { return instance_of_; }

  std::span<const Triple> triples() const { return triples_; }
  GraphCounts counts() const;

  // Triples with t as subject / object, in sorted triple order.
  std::vector<Triple> outgoing(TermId t) const;
  std::vector<Triple> incoming(TermId t) const;
  // Triples where t is subject or object; a self-loop appears once.
  std::vector<Triple> neighborhood(TermId t) const;
  std::vector<Triple> neighborhood(std::string_view id) const;

  std::span<const TermId> objects(TermId s, TermId p) const;
  std::span<const TermId> subjects(TermId p, TermId o) const;
  std::vector<Triple> with_predicate(TermId p) const;
  bool contains(TermId s, TermId p, TermId o) const;

  // Objects of (t, instance_of, ?) sorted ascending.
  std::span<const TermId> types_of(TermId t) const;
  std::vector<TermId> types_of(std::string_view id) const;

  // Terms whose lowercased label contains `token` as a whole token.
  std::span<const TermId> terms_with_label_token(std::string_view token) const;

 private:
  static std::uint64_t key(TermId a, TermId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  std::span<const TermId> lookup(const std::unordered_map<std::uint64_t, std::vector<TermId>>& m,
                                 TermId a, TermId b) const;

  std::vector<std::string> ids_;
  std::unordered_map<std::string, TermId> index_;
  std::vector<std::string> labels_;
  std::vector<std::uint8_t> labeled_;
  std::vector<ElementKind> kinds_;
  TermId instance_of_ = kNoTerm;

  std::vector<Triple> triples_;  // sorted, unique
  std::vector<std::vector<std::uint32_t>> by_subject_;  // triple indices
  std::vector<std::vector<std::uint32_t>> by_object_;
  std::unordered_map<std::uint64_t, std::vector<TermId>> sp_objects_;
  std::unordered_map<std::uint64_t, std::vector<TermId>> po_subjects_;
  std::unordered_map<TermId, std::vector<std::uint32_t>> by_predicate_;
  std::unordered_map<std::string, std::vector<TermId>> label_tokens_;
};

// Reads the tab-separated triples file and the id/label file. Lines starting
// with '#' and blank lines are skipped; duplicate triples are merged.
KnowledgeGraph load_graph(const std::filesystem::path& triples_file,
                          const std::filesystem::path& labels_file,
                          std::string_view instance_of_id);

// Writes the graph back in the same formats, triples in sorted order.
void dump_graph(const KnowledgeGraph& g, const std::filesystem::path& triples_file,
                const std::filesystem::path& labels_file);

std::string unlabeled_placeholder(std::string_view id);

}  // namespace dcg::kg
