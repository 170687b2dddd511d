// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/linker/aho_corasick.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace dcg::linker {

std::int32_t TokenAutomaton::child(std::int32_t node, std::int32_t sym) const {
  const auto& nx = nodes_[node].next;
  auto it = std::lower_bound(nx.begin(), nx.end(), std::pair{sym, std::int32_t{-1}});
  if (it != nx.end() && it->first == sym) return it->second;
  return -1;
}

std::int32_t TokenAutomaton::symbol(const std::string& tok) const {
  auto it = symbols_.find(tok);
  return it == symbols_.end() ? -1 : it->second;
}

std::uint32_t TokenAutomaton::add(std::span<const std::string> tokens) {
  if (built_) throw std::logic_error("TokenAutomaton::add after build");
  if (tokens.empty()) throw std::invalid_argument("empty pattern");
  std::int32_t cur = 0;
  for (const auto& tok : tokens) {
    auto [sit, _] = symbols_.try_emplace(tok, static_cast<std::int32_t>(symbols_.size()));
    std::int32_t sym = sit->second;
    std::int32_t nxt = child(cur, sym);
    if (nxt < 0) {
      nxt = static_cast<std::int32_t>(nodes_.size());
      Node n;
      n.depth = nodes_[cur].depth + 1;
      nodes_.push_back(std::move(n));
      auto& vec = nodes_[cur].next;
      vec.insert(std::lower_bound(vec.begin(), vec.end(), std::pair{sym, std::int32_t{-1}}),
                 {sym, nxt});
    }
    cur = nxt;
  }
  if (nodes_[cur].pattern < 0) {
    nodes_[cur].pattern = static_cast<std::int32_t>(pattern_lengths_.size());
    pattern_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
  }
  return static_cast<std::uint32_t>(nodes_[cur].pattern);
}

void TokenAutomaton::build() {
  std::queue<std::int32_t> q;
  for (auto [sym, c] : nodes_[0].next) {
    nodes_[c].fail = 0;
    q.push(c);
  }
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (auto [sym, v] : nodes_[u].next) {
      std::int32_t f = nodes_[u].fail;
      while (f != 0 && child(f, sym) < 0) f = nodes_[f].fail;
      std::int32_t fc = child(f, sym);
      nodes_[v].fail = (fc >= 0 && fc != v) ? fc : 0;
      auto fl = nodes_[v].fail;
      nodes_[v].dict = nodes_[fl].pattern >= 0 ? fl : nodes_[fl].dict;
      q.push(v);
    }
  }
  built_ = true;
}

std::vector<TokenAutomaton::Match> TokenAutomaton::find_all(std::span<const std::string> text) const {
  if (!built_) throw std::logic_error("TokenAutomaton::find_all before build");
  std::vector<Match> out;
  std::int32_t cur = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    std::int32_t sym = symbol(text[i]);
    if (sym < 0) {
      cur = 0;
      continue;
    }
    while (cur != 0 && child(cur, sym) < 0) cur = nodes_[cur].fail;
    std::int32_t nxt = child(cur, sym);
    cur = nxt < 0 ? 0 : nxt;
    for (std::int32_t n = nodes_[cur].pattern >= 0 ? cur : nodes_[cur].dict; n >= 0; n = nodes_[n].dict) {
      auto p = static_cast<std::uint32_t>(nodes_[n].pattern);
      out.push_back({i + 1 - pattern_lengths_[p], i + 1, p});
    }
  }
  return out;
}

}  // namespace dcg::linker
