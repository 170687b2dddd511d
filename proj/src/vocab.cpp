// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/model/vocab.hpp"

#include <fstream>
#include <stdexcept>

#include "dcg/text/tokenize.hpp"

namespace dcg::model {

Vocabulary::Vocabulary(std::vector<std::string> symbols) {
  for (auto& s : symbols) add(s);
}

std::uint32_t Vocabulary::add(const std::string& sym) {
  auto [it, inserted] = index_.try_emplace(sym, static_cast<std::uint32_t>(symbols_.size()));
  if (inserted) symbols_.push_back(sym);
  return it->second;
}

std::optional<std::uint32_t> Vocabulary::find(const std::string& sym) const {
  auto it = index_.find(sym);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (const auto& s : symbols_) out << s << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (v.find(line)) throw std::runtime_error("duplicate vocabulary symbol '" + line + "' in " + file.string());
    v.add(line);
  }
  return v;
}

Vocabulary make_text_vocab(const std::vector<std::string>& tokens) {
  Vocabulary v({"[PAD]", kUnk, kCls, kSep});
  for (const auto& t : tokens) v.add(t);
  return v;
}

std::vector<std::uint32_t> encode_tokens(const Vocabulary& v, std::span<const std::string> tokens) {
  const auto unk = *v.find(kUnk);
  std::vector<std::uint32_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(v.find(t).value_or(unk));
  return out;
}

Vocabulary default_syntax_vocab() {
  return Vocabulary({kBos, kEoq, "SELECT", "ASK", "WHERE", "DISTINCT", "COUNT", "AS", "UNION", "{", "}",
                     "(", ")", ".", "?x", "?y", "?z", "?x1", "?x2", "?x3", "?count"});
}

namespace {

void term_symbol(std::vector<std::string>& out, const sparql::Term& t) {
  if (auto v = std::get_if<sparql::Var>(&t)) {
    out.push_back("?" + v->name);
  } else {
    const auto& iri = std::get<sparql::Iri>(t);
    out.push_back((iri.prefix == sparql::Prefix::wd ? "wd:" : "wdt:") + iri.id);
  }
}

void group_symbols(std::vector<std::string>& out, const sparql::Group& g) {
  out.push_back("{");
  for (const auto& e : g.elements) {
    if (auto tp = std::get_if<sparql::TriplePattern>(&e)) {
      term_symbol(out, tp->subject);
      term_symbol(out, tp->predicate);
      term_symbol(out, tp->object);
      out.push_back(".");
    } else {
      const auto& u = std::get<sparql::UnionBlock>(e);
      for (std::size_t i = 0; i < u.branches.size(); ++i) {
        if (i) out.push_back("UNION");
        group_symbols(out, u.branches[i]);
      }
    }
  }
  out.push_back("}");
}

}  // namespace

std::vector<std::string> query_symbols(const sparql::QueryAst& q) {
  std::vector<std::string> out;
  switch (q.form) {
    case sparql::QueryForm::ask: out.push_back("ASK"); break;
    case sparql::QueryForm::select:
      out.push_back("SELECT");
      if (q.distinct) out.push_back("DISTINCT");
      out.push_back("?" + q.projection);
      out.push_back("WHERE");
      break;
    case sparql::QueryForm::count:
      out.insert(out.end(), {"SELECT", "(", "COUNT", "("});
      if (q.distinct) out.push_back("DISTINCT");
      out.insert(out.end(), {"?" + q.projection, ")", "AS", "?" + q.count_alias, ")", "WHERE"});
      break;
  }
  group_symbols(out, q.where);
  return out;
}

Alignment align_query(const sparql::QueryAst& q, const Vocabulary& syntax, const graph::ContextSubgraph& sg) {
  Alignment a;
  for (const auto& sym : query_symbols(q)) {
    if (sym.starts_with("wd:") || sym.starts_with("wdt:")) {
      auto id = sym.substr(sym.find(':') + 1);
      if (auto n = sg.index_of(id)) {
        a.tokens.push_back(OutputToken::node(*n));
      } else {
        a.reachable = false;
        a.missing.push_back(id);
      }
    } else if (auto s = syntax.find(sym)) {
      a.tokens.push_back(OutputToken::syntax(*s));
    } else {
      a.reachable = false;
      a.missing.push_back(sym);
    }
  }
  a.tokens.push_back(OutputToken::syntax(*syntax.find(kEoq)));
  return a;
}

std::string realize(std::span<const OutputToken> tokens, const Vocabulary& syntax,
                    const graph::ContextSubgraph& sg) {
  const auto eoq = *syntax.find(kEoq);
  std::vector<std::string> parts;
  for (const auto& t : tokens) {
    if (t.tag == OutputToken::Tag::syntax) {
      if (t.index == eoq) break;
      parts.push_back(syntax.symbol(t.index));
    } else {
      const auto& n = sg.nodes().at(t.index);
      parts.push_back((n.node_class == kg::ElementKind::relation ? "wdt:" : "wd:") + n.element);
    }
  }
  auto raw = text::join(parts);
  try {
    return sparql::serialize(sparql::parse_sparql(raw));
  } catch (const std::exception&) {
    return raw;
  }
}

}  // namespace dcg::model
