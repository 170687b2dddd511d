// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/eval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "dcg/sparql/query.hpp"

namespace dcg::eval {

namespace {

std::string normalize_ws(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::optional<std::string> canonical(std::string_view s) {
  try {
    return sparql::serialize(sparql::parse_sparql(s));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct Acc {
  std::size_t n = 0;
  double em = 0;
  std::size_t nf = 0;
  double f1 = 0;
  std::size_t na = 0;
  double acc = 0;

  void add(const TurnScore& s) {
    ++n;
    em += s.em;
    if (s.f1) {
      ++nf;
      f1 += *s.f1;
    }
    if (s.accuracy) {
      ++na;
      acc += *s.accuracy;
    }
  }
  SliceRow row() const {
    SliceRow r;
    r.count = n;
    r.em = n ? em / static_cast<double>(n) : 0.0;
    if (nf) r.f1 = f1 / static_cast<double>(nf);
    if (na) r.accuracy = acc / static_cast<double>(na);
    return r;
  }
};

nlohmann::json row_json(const SliceRow& r) {
  nlohmann::json j = {{"count", r.count}, {"em", r.em}};
  j["f1"] = r.f1 ? nlohmann::json(*r.f1) : nlohmann::json(nullptr);
  j["accuracy"] = r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json(nullptr);
  return j;
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
  return buf;
}

}  // namespace

int exact_match(std::string_view pred, std::string_view gold) {
  auto cp = canonical(pred);
  auto cg = canonical(gold);
  if (cp && cg) return *cp == *cg ? 1 : 0;
  return normalize_ws(pred) == normalize_ws(gold) ? 1 : 0;
}

Scored set_f1(const sparql::Answer& pred, const sparql::Answer& gold) {
  if (pred.kind != sparql::AnswerKind::entity_set || gold.kind != sparql::AnswerKind::entity_set) return {0.0, true};
  const auto& p = pred.entities;
  const auto& g = gold.entities;
  if (p.empty() && g.empty()) return {1.0, false};
  if (p.empty() || g.empty()) return {0.0, false};
  std::size_t tp = 0;
  for (std::size_t i = 0, j = 0; i < p.size() && j < g.size();) {
    if (p[i] == g[j]) {
      ++tp;
      ++i;
      ++j;
    } else if (p[i] < g[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  if (tp == 0) return {0.0, false};
  double prec = static_cast<double>(tp) / static_cast<double>(p.size());
  double rec = static_cast<double>(tp) / static_cast<double>(g.size());
  return {2.0 * prec * rec / (prec + rec), false};
}

Scored answer_accuracy(const sparql::Answer& pred, const sparql::Answer& gold) {
  if (pred.kind != gold.kind || gold.kind == sparql::AnswerKind::entity_set) return {0.0, true};
  if (gold.kind == sparql::AnswerKind::boolean) return {pred.truth == gold.truth ? 1.0 : 0.0, false};
  return {pred.value == gold.value ? 1.0 : 0.0, false};
}

TurnScore score_turn(std::string_view pred_sparql, const std::optional<sparql::Answer>& pred_answer,
                     std::string_view gold_sparql, const sparql::Answer& gold_answer) {
  TurnScore s;
  s.em = exact_match(pred_sparql, gold_sparql);
  s.unexecutable = !pred_answer.has_value();
  const bool set_kind = gold_answer.kind == sparql::AnswerKind::entity_set;
  Scored sc;
  if (pred_answer) sc = set_kind ? set_f1(*pred_answer, gold_answer) : answer_accuracy(*pred_answer, gold_answer);
  s.kind_mismatch = sc.kind_mismatch;
  (set_kind ? s.f1 : s.accuracy) = sc.score;
  return s;
}

Report aggregate(std::span<const TurnScore> scores) {
  Report r;
  r.turns = scores.size();
  if (scores.empty()) return r;
  std::map<std::string, Acc> types, phen;
  std::map<std::size_t, Acc> pos;
  Acc all;
  std::size_t unexec = 0;
  for (const auto& s : scores) {
    types[s.question_type].add(s);
    pos[s.turn_position].add(s);
    for (const auto& p : s.phenomena) phen[p].add(s);
    all.add(s);
    unexec += s.unexecutable;
    r.unreachable += s.unreachable;
  }
  double em = 0, f1 = 0, acc = 0;
  std::size_t nf = 0, na = 0;
  for (const auto& [k, a] : types) {
    auto row = a.row();
    em += row.em;
    if (row.f1) {
      f1 += *row.f1;
      ++nf;
    }
    if (row.accuracy) {
      acc += *row.accuracy;
      ++na;
    }
    r.by_type[k] = row;
  }
  r.overall_em = em / static_cast<double>(types.size());
  if (nf) r.overall_f1 = f1 / static_cast<double>(nf);
  if (na) r.overall_accuracy = acc / static_cast<double>(na);
  r.micro_em = all.row().em;
  for (const auto& [k, a] : pos) r.by_turn_position[k] = a.row();
  for (const auto& [k, a] : phen) r.by_phenomenon[k] = a.row();
  r.unexecutable_rate = static_cast<double>(unexec) / static_cast<double>(scores.size());
  return r;
}

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  j["turns"] = turns;
  j["overall"] = {{"em", overall_em}, {"micro_em", micro_em}};
  j["overall"]["f1"] = overall_f1 ? nlohmann::json(*overall_f1) : nlohmann::json(nullptr);
  j["overall"]["accuracy"] = overall_accuracy ? nlohmann::json(*overall_accuracy) : nlohmann::json(nullptr);
  j["by_type"] = nlohmann::json::object();
  for (const auto& [k, v] : by_type) j["by_type"][k] = row_json(v);
  j["by_turn_position"] = nlohmann::json::array();
  for (const auto& [k, v] : by_turn_position) {
    auto row = row_json(v);
    row["turn"] = k;
    j["by_turn_position"].push_back(row);
  }
  j["by_phenomenon"] = nlohmann::json::object();
  for (const auto& [k, v] : by_phenomenon) j["by_phenomenon"][k] = row_json(v);
  j["unexecutable_rate"] = unexecutable_rate;
  j["unreachable"] = unreachable;
  return j;
}

std::string Report::to_table() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-34s %6s %8s %8s %8s\n", "Question Type", "#", "F1", "Acc", "EM");
  os << line;
  for (const auto& [k, v] : by_type) {
    std::snprintf(line, sizeof line, "%-34s %6zu %8s %8s %8s\n", k.c_str(), v.count, pct(v.f1).c_str(),
                  pct(v.accuracy).c_str(), pct(v.em).c_str());
    os << line;
  }
  std::snprintf(line, sizeof line, "%-34s %6zu %8s %8s %8s\n", "Overall (macro)", turns, pct(overall_f1).c_str(),
                pct(overall_accuracy).c_str(), pct(overall_em).c_str());
  os << line;
  os << "\nEM by turn position:";
  for (const auto& [k, v] : by_turn_position) os << "  " << k << ":" << pct(v.em);
  os << "\nEM by phenomenon:";
  for (const auto& [k, v] : by_phenomenon) os << "  " << k << ":" << pct(v.em);
  std::snprintf(line, sizeof line, "\nunexecutable: %s%%  unreachable turns: %zu\n", pct(unexecutable_rate).c_str(),
                unreachable);
  os << line;
  return os.str();
}

}  // namespace dcg::eval
