// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// AST for the query subset: SELECT / ASK / COUNT over basic graph patterns
// with UNION. Constants carry their surface prefix (wd: for entities and
// types, wdt: for relations).

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dcg::sparql {

enum class Prefix { wd, wdt };

struct Var {
  std::string name;  // without the leading '?'
  friend bool operator==(const Var&, const Var&) = default;
};

struct Iri {
  Prefix prefix = Prefix::wd;
  std::string id;
  friend bool operator==(const Iri&, const Iri&) = default;
};

using Term = std::variant<Var, Iri>;

struct TriplePattern {
  Term subject;
  Term predicate;
  Term object;
  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct Group;

struct UnionBlock {
  std::vector<Group> branches;
  friend bool operator==(const UnionBlock&, const UnionBlock&);
};

using GroupElement = std::variant<TriplePattern, UnionBlock>;

struct Group {
  std::vector<GroupElement> elements;
  friend bool operator==(const Group&, const Group&) = default;
};

inline bool operator==(const UnionBlock& a, const UnionBlock& b) { return a.branches == b.branches; }

enum class QueryForm { select, ask, count };

struct QueryAst {
  QueryForm form = QueryForm::select;
  bool distinct = false;
  std::string projection;    // variable name; empty for ASK
  std::string count_alias;   // COUNT only, e.g. "count"
  Group where;
  friend bool operator==(const QueryAst&, const QueryAst&) = default;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedConstruct : public std::runtime_error {
 public:
  explicit UnsupportedConstruct(std::string construct);
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

class InvalidQuery : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

QueryAst parse_sparql(std::string_view text);

// Throws InvalidQuery when the projection is missing or not used in the
// pattern, or when any group or union branch is empty.
void validate(const QueryAst& q);

// Canonical single-spaced text; validates first.
std::string serialize(const QueryAst& q);

// Every constant id in pattern order (duplicates kept).
std::vector<std::string> constants(const QueryAst& q);

std::vector<std::string> variables(const QueryAst& q);

}  // namespace dcg::sparql
