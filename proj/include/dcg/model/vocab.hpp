// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcg/graph/context_graph.hpp"
#include "dcg/sparql/query.hpp"

namespace dcg::model {

// Symbol table with index = position. Saved as one symbol per line.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> symbols);

  std::uint32_t add(const std::string& sym);
  std::optional<std::uint32_t> find(const std::string& sym) const;
  const std::string& symbol(std::uint32_t id) const { return symbols_.at(id); }
  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  void save(const std::filesystem::path& file) const;
  static Vocabulary load(const std::filesystem::path& file);

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

inline constexpr const char* kUnk = "[UNK]";
inline constexpr const char* kCls = "[CLS]";
inline constexpr const char* kSep = "[SEP]";

// Natural-language vocabulary with the special tokens at fixed positions.
Vocabulary make_text_vocab(const std::vector<std::string>& tokens);
std::vector<std::uint32_t> encode_tokens(const Vocabulary& v, std::span<const std::string> tokens);

inline constexpr const char* kBos = "<bos>";
inline constexpr const char* kEoq = "<eoq>";

// SPARQL syntax symbols V_s. KG ids are never part of it.
Vocabulary default_syntax_vocab();

struct OutputToken {
  enum class Tag : std::uint8_t { syntax, node };
  Tag tag = Tag::syntax;
  std::uint32_t index = 0;  // syntax id or node id depending on tag

  static OutputToken syntax(std::uint32_t id) { return {Tag::syntax, id}; }
  static OutputToken node(std::uint32_t id) { return {Tag::node, id}; }
  friend bool operator==(const OutputToken&, const OutputToken&) = default;
};

// Flattened symbol stream of a query: keywords, punctuation, variables and
// constants ("wd:Q1" / "wdt:P1"), in canonical order.
std::vector<std::string> query_symbols(const sparql::QueryAst& q);

struct Alignment {
  std::vector<OutputToken> tokens;  // ends with <eoq>
  bool reachable = true;
  std::vector<std::string> missing;  // ids or symbols that could not be aligned
};

// Maps a gold query onto V_s and the nodes of `sg`.
Alignment align_query(const sparql::QueryAst& q, const Vocabulary& syntax, const graph::ContextSubgraph& sg);

// Renders output tokens (stopping at <eoq>) to text. Node tokens become
// wd:/wdt: terms depending on the node class. The result is canonicalized
// through the query parser when it parses.
std::string realize(std::span<const OutputToken> tokens, const Vocabulary& syntax,
                    const graph::ContextSubgraph& sg);

}  // namespace dcg::model
