// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include <algorithm>
#include <cctype>
#include <set>

#include "dcg/sparql/query.hpp"

namespace dcg::sparql {

SyntaxError::SyntaxError(std::size_t offset, const std::string& what)
    : std::runtime_error("syntax error at byte " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

UnsupportedConstruct::UnsupportedConstruct(std::string construct)
    : std::runtime_error("unsupported construct: " + construct), construct_(std::move(construct)) {}

namespace {

enum class Tok { word, var, iri, lbrace, rbrace, lparen, rparen, dot, end };

struct Token {
  Tok kind;
  std::string text;  // upper-cased for words; name for vars; id for iris
  Prefix prefix = Prefix::wd;
  std::size_t offset = 0;
};

bool name_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '-';
}

const std::set<std::string>& unsupported_keywords() {
  static const std::set<std::string> k = {
      "FILTER", "OPTIONAL", "ORDER", "GROUP", "LIMIT", "OFFSET", "MINUS", "BIND", "VALUES",
      "HAVING", "CONSTRUCT", "DESCRIBE", "PREFIX", "BASE", "SERVICE", "FROM", "NOT", "EXISTS",
      "SUM", "MIN", "MAX", "AVG", "SAMPLE", "GROUP_CONCAT"};
  return k;
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    switch (c) {
      case '{': out.push_back({Tok::lbrace, "{", Prefix::wd, start}); ++i; continue;
      case '}': out.push_back({Tok::rbrace, "}", Prefix::wd, start}); ++i; continue;
      case '(': out.push_back({Tok::lparen, "(", Prefix::wd, start}); ++i; continue;
      case ')': out.push_back({Tok::rparen, ")", Prefix::wd, start}); ++i; continue;
      case '.': out.push_back({Tok::dot, ".", Prefix::wd, start}); ++i; continue;
      case '"':
      case '\'': throw UnsupportedConstruct("literal");
      case '<': throw UnsupportedConstruct("IRI reference");
      case ';': throw UnsupportedConstruct("predicate-object list");
      case ',': throw UnsupportedConstruct("object list");
      default: break;
    }
    if (c == '?' || c == '$') {
      ++i;
      while (i < s.size() && name_char(s[i])) ++i;
      if (i == start + 1) throw SyntaxError(start, "empty variable name");
      out.push_back({Tok::var, std::string(s.substr(start + 1, i - start - 1)), Prefix::wd, start});
      continue;
    }
    if (name_char(c)) {
      while (i < s.size() && name_char(s[i])) ++i;
      std::string word(s.substr(start, i - start));
      if (i < s.size() && s[i] == ':') {
        ++i;
        std::size_t id_start = i;
        while (i < s.size() && name_char(s[i])) ++i;
        std::string id(s.substr(id_start, i - id_start));
        if (id.empty()) throw SyntaxError(id_start, "missing local name after '" + word + ":'");
        if (word == "wd") {
          out.push_back({Tok::iri, id, Prefix::wd, start});
        } else if (word == "wdt") {
          out.push_back({Tok::iri, id, Prefix::wdt, start});
        } else {
          throw UnsupportedConstruct("prefix " + word + ":");
        }
        continue;
      }
      std::string upper = word;
      std::transform(upper.begin(), upper.end(), upper.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
      if (unsupported_keywords().contains(upper)) throw UnsupportedConstruct(upper);
      out.push_back({Tok::word, upper, Prefix::wd, start});
      continue;
    }
    if (c == '*') throw UnsupportedConstruct("SELECT *");
    throw SyntaxError(start, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::end, "", Prefix::wd, s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  QueryAst parse() {
    QueryAst q;
    if (accept_word("SELECT")) {
      if (accept_word("DISTINCT")) q.distinct = true;
      if (peek().kind == Tok::lparen) {
        next();
        expect_word("COUNT");
        expect(Tok::lparen, "'('");
        if (accept_word("DISTINCT")) q.distinct = true;
        q.projection = expect(Tok::var, "variable").text;
        expect(Tok::rparen, "')'");
        expect_word("AS");
        q.count_alias = expect(Tok::var, "variable").text;
        expect(Tok::rparen, "')'");
        q.form = QueryForm::count;
      } else {
        q.projection = expect(Tok::var, "projected variable").text;
        if (peek().kind == Tok::var) throw UnsupportedConstruct("multiple projection variables");
        q.form = QueryForm::select;
      }
      expect_word("WHERE");
    } else if (accept_word("ASK")) {
      q.form = QueryForm::ask;
      accept_word("WHERE");
    } else {
      throw SyntaxError(peek().offset, "expected SELECT or ASK");
    }
    q.where = group();
    if (peek().kind != Tok::end) throw SyntaxError(peek().offset, "trailing input");
    return q;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  bool accept_word(std::string_view w) {
    if (peek().kind == Tok::word && peek().text == w) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_word(std::string_view w) {
    if (!accept_word(w)) throw SyntaxError(peek().offset, "expected " + std::string(w));
  }

  const Token& expect(Tok k, std::string_view what) {
    if (peek().kind != k) throw SyntaxError(peek().offset, "expected " + std::string(what));
    return next();
  }

  Term term() {
    const Token& t = peek();
    if (t.kind == Tok::var) {
      next();
      return Var{t.text};
    }
    if (t.kind == Tok::iri) {
      next();
      return Iri{t.prefix, t.text};
    }
    throw SyntaxError(t.offset, "expected variable or wd:/wdt: term");
  }

  Group group() {
    expect(Tok::lbrace, "'{'");
    Group g;
    while (peek().kind != Tok::rbrace) {
      if (peek().kind == Tok::end) throw SyntaxError(peek().offset, "unterminated group");
      if (peek().kind == Tok::lbrace) {
        UnionBlock u;
        u.branches.push_back(group());
        while (accept_word("UNION")) u.branches.push_back(group());
        g.elements.emplace_back(std::move(u));
        accept_dot();
        continue;
      }
      if (peek().kind == Tok::word) throw SyntaxError(peek().offset, "unexpected keyword " + peek().text);
      TriplePattern tp{term(), term(), term()};
      g.elements.emplace_back(std::move(tp));
      if (!accept_dot() && peek().kind != Tok::rbrace) {
        throw SyntaxError(peek().offset, "expected '.' after triple pattern");
      }
    }
    next();
    return g;
  }

  bool accept_dot() {
    if (peek().kind == Tok::dot) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void collect_vars(const Group& g, std::vector<std::string>& out) {
  auto add = [&](const Term& t) {
    if (auto v = std::get_if<Var>(&t)) {
      if (std::find(out.begin(), out.end(), v->name) == out.end()) out.push_back(v->name);
    }
  };
  for (const auto& e : g.elements) {
    if (auto tp = std::get_if<TriplePattern>(&e)) {
      add(tp->subject);
      add(tp->predicate);
      add(tp->object);
    } else {
      for (const auto& b : std::get<UnionBlock>(e).branches) collect_vars(b, out);
    }
  }
}

void collect_constants(const Group& g, std::vector<std::string>& out) {
  auto add = [&](const Term& t) {
    if (auto iri = std::get_if<Iri>(&t)) out.push_back(iri->id);
  };
  for (const auto& e : g.elements) {
    if (auto tp = std::get_if<TriplePattern>(&e)) {
      add(tp->subject);
      add(tp->predicate);
      add(tp->object);
    } else {
      for (const auto& b : std::get<UnionBlock>(e).branches) collect_constants(b, out);
    }
  }
}

void validate_group(const Group& g) {
  if (g.elements.empty()) throw InvalidQuery("empty pattern block");
  for (const auto& e : g.elements) {
    if (auto u = std::get_if<UnionBlock>(&e)) {
      if (u->branches.empty()) throw InvalidQuery("union without branches");
      for (const auto& b : u->branches) validate_group(b);
    }
  }
}

void write_term(std::string& out, const Term& t) {
  if (auto v = std::get_if<Var>(&t)) {
    out += '?';
    out += v->name;
  } else {
    const auto& iri = std::get<Iri>(t);
    out += iri.prefix == Prefix::wd ? "wd:" : "wdt:";
    out += iri.id;
  }
}

void write_group(std::string& out, const Group& g) {
  out += "{";
  for (const auto& e : g.elements) {
    out += ' ';
    if (auto tp = std::get_if<TriplePattern>(&e)) {
      write_term(out, tp->subject);
      out += ' ';
      write_term(out, tp->predicate);
      out += ' ';
      write_term(out, tp->object);
      out += " .";
    } else {
      const auto& u = std::get<UnionBlock>(e);
      for (std::size_t i = 0; i < u.branches.size(); ++i) {
        if (i) out += " UNION ";
        write_group(out, u.branches[i]);
      }
    }
  }
  out += " }";
}

}  // namespace

QueryAst parse_sparql(std::string_view text) {
  Parser p(lex(text));
  return p.parse();
}

std::vector<std::string> variables(const QueryAst& q) {
  std::vector<std::string> out;
  collect_vars(q.where, out);
  return out;
}

std::vector<std::string> constants(const QueryAst& q) {
  std::vector<std::string> out;
  collect_constants(q.where, out);
  return out;
}

void validate(const QueryAst& q) {
  validate_group(q.where);
  if (q.form == QueryForm::ask) return;
  if (q.projection.empty()) throw InvalidQuery("missing projection variable");
  auto vars = variables(q);
  if (std::find(vars.begin(), vars.end(), q.projection) == vars.end()) {
    throw InvalidQuery("projected variable ?" + q.projection + " does not occur in the pattern");
  }
  if (q.form == QueryForm::count && q.count_alias.empty()) throw InvalidQuery("COUNT without alias");
}

std::string serialize(const QueryAst& q) {
  validate(q);
  std::string out;
  switch (q.form) {
    case QueryForm::ask: out = "ASK "; break;
    case QueryForm::select:
      out = q.distinct ? "SELECT DISTINCT ?" : "SELECT ?";
      out += q.projection + " WHERE ";
      break;
    case QueryForm::count:
      out = q.distinct ? "SELECT (COUNT(DISTINCT ?" : "SELECT (COUNT(?";
      out += q.projection + ") AS ?" + q.count_alias + ") WHERE ";
      break;
  }
  write_group(out, q.where);
  return out;
}

}  // namespace dcg::sparql
