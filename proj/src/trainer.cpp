// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/train/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "dcg/sparql/executor.hpp"
#include "dcg/sparql/query.hpp"
#include "dcg/text/tokenize.hpp"
#include "dcg/util/rng.hpp"

namespace dcg::train {

NonFiniteLoss::NonFiniteLoss(std::size_t step, const std::string& example_id)
    : std::runtime_error("non-finite loss at step " + std::to_string(step) + " (batch starting with " +
                         example_id + ")"),
      step_(step),
      example_(example_id) {}

Featurized featurize(const model::ParserModel& m, const TrainExample& ex) {
  Featurized f;
  f.input_ids = model::encode_tokens(m.text_vocab(), ex.input);
  f.graph = model::graph_input(ex.subgraph, m.text_vocab());
  f.gold = ex.gold;
  f.id = ex.interaction_id + "#" + std::to_string(ex.turn_position);
  return f;
}

std::vector<std::uint32_t> name_tokens(const kg::KnowledgeGraph& g, const model::Vocabulary& v,
                                       std::size_t max_labels) {
  std::map<std::string, std::size_t> entity_df;
  std::set<std::string> elsewhere;
  std::unordered_set<kg::TermId> types;
  for (const auto& tr : g.triples())
    if (tr.predicate == g.instance_of()) types.insert(tr.object);
  for (kg::TermId t = 0; t < g.term_count(); ++t) {
    auto toks = text::tokenize(g.label(t));
    std::set<std::string> uniq(toks.begin(), toks.end());
    const bool entity = g.kind(t) == kg::ElementKind::entity && !types.count(t);
    for (const auto& w : uniq) {
      if (entity)
        ++entity_df[w];
      else
        elsewhere.insert(w);
    }
  }
  std::vector<std::uint32_t> out;
  for (const auto& [w, df] : entity_df) {
    if (df > max_labels || elsewhere.count(w) || text::is_stopword(w)) continue;
    if (w.size() < 2 || !std::isalpha(static_cast<unsigned char>(w[0]))) continue;
    if (auto id = v.find(w)) out.push_back(*id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Featurized shuffle_names(const Featurized& f, std::span<const std::uint32_t> pool, util::Rng& rng) {
  std::unordered_set<std::uint32_t> in_pool(pool.begin(), pool.end());
  std::unordered_map<std::uint32_t, std::uint32_t> map;
  std::unordered_set<std::uint32_t> used;
  auto remap = [&](std::uint32_t tok) {
    if (!in_pool.count(tok)) return tok;
    auto it = map.find(tok);
    if (it != map.end()) return it->second;
    std::uint32_t to = tok;
    // Rejection sampling stays cheap as long as the example holds far fewer
    // names than the pool.
    for (int tries = 0; tries < 64; ++tries) {
      auto c = pool[rng.below(pool.size())];
      if (!used.count(c)) {
        to = c;
        break;
      }
    }
    used.insert(to);
    map.emplace(tok, to);
    return to;
  };
  Featurized out = f;
  if (pool.empty()) return out;
  for (auto& t : out.input_ids) t = remap(t);
  for (auto& node : out.graph.node_tokens)
    for (auto& t : node) t = remap(t);
  return out;
}

model::Vocabulary build_text_vocab(std::span<const TrainExample> examples, const kg::KnowledgeGraph& g) {
  std::set<std::string> toks;
  for (const auto& ex : examples)
    for (const auto& t : ex.input)
      if (t != model::kCls && t != model::kSep) toks.insert(t);
  for (kg::TermId t = 0; t < g.term_count(); ++t)
    for (auto& w : text::tokenize(g.label(t))) toks.insert(std::move(w));
  return model::make_text_vocab({toks.begin(), toks.end()});
}

ad::Var batch_loss(ad::Tape& t, model::ParserModel& m, std::span<const Featurized* const> batch) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  std::vector<model::GraphInput> graphs;
  graphs.reserve(batch.size());
  for (const auto* f : batch) graphs.push_back(f->graph);
  auto gb = model::batch_graphs(graphs);
  auto h_all = m.encode_graph(t, gb);
  std::vector<ad::Var> losses;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto z = m.encode_utterance(t, batch[i]->input_ids);
    auto h = ad::slice_rows(h_all, gb.offsets[i], gb.offsets[i + 1]);
    losses.push_back(m.sequence_loss(t, z, h, batch[i]->gold));
  }
  auto stacked = ad::concat_rows(losses);
  return ad::mean(stacked);
}

namespace {

std::vector<ad::Parameter*> all_params(model::ParserModel& m) { return m.params().all(); }

std::vector<ad::Tensor> snapshot_values(model::ParserModel& m) {
  std::vector<ad::Tensor> v;
  for (auto* p : m.params().all()) v.push_back(p->value);
  return v;
}

void restore_values(model::ParserModel& m, const std::vector<ad::Tensor>& v) {
  auto ps = m.params().all();
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = v[i];
}

}  // namespace

TrainResult train(model::ParserModel& m, std::span<const TrainExample> train_set,
                  std::span<const TrainExample> dev_set, const TrainConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  TrainResult res;
  std::vector<Featurized> data;
  for (const auto& ex : train_set) {
    if (!ex.reachable) {
      ++res.skipped_unreachable;
      continue;
    }
    data.push_back(featurize(m, ex));
  }
  if (data.empty()) return res;

  std::ofstream log;
  if (!cfg.metrics_log.empty()) {
    if (cfg.metrics_log.has_parent_path()) std::filesystem::create_directories(cfg.metrics_log.parent_path());
    log.open(cfg.metrics_log);
  }

  AdamW opt(cfg.optimizer);
  util::Rng rng(cfg.seed);
  std::mt19937_64 dropout_rng(cfg.seed ^ 0x5DEECE66DULL);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto params = all_params(m);
  std::vector<ad::Tensor> best;
  std::size_t since_best = 0;
  const auto bs = std::max<std::size_t>(1, cfg.batch_size);
  bool stop = false;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs && !stop; ++epoch) {
    const auto epoch_start = clock::now();
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += bs) {
      std::vector<const Featurized*> batch;
      std::vector<Featurized> shuffled;
      shuffled.reserve(bs);
      for (std::size_t i = b; i < std::min(order.size(), b + bs); ++i) {
        const auto& f = data[order[i]];
        if (!cfg.name_pool.empty() && rng.chance(cfg.name_shuffle)) {
          shuffled.push_back(shuffle_names(f, cfg.name_pool, rng));
          batch.push_back(&shuffled.back());
        } else {
          batch.push_back(&f);
        }
      }
      m.params().zero_grad();
      ad::Tape tape;
      m.enable_dropout(&dropout_rng);
      auto loss = batch_loss(tape, m, batch);
      m.disable_dropout();
      const double lv = loss.value().data[0];
      if (!std::isfinite(lv)) throw NonFiniteLoss(res.steps + 1, batch.front()->id);
      tape.backward(loss);
      if (cfg.clip_norm > 0.0) clip_grad_norm(params, cfg.clip_norm);
      opt.step(params);
      ++res.steps;
      loss_sum += lv;
      ++batches;
      if (cfg.max_steps && res.steps >= cfg.max_steps) {
        stop = true;
        break;
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.steps = res.steps;
    rec.train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    if (!dev_set.empty()) {
      rec.dev_em = exact_match_rate(m, dev_set);
      if (!res.best_dev_em || *rec.dev_em > *res.best_dev_em) {
        res.best_dev_em = rec.dev_em;
        res.best_epoch = epoch;
        best = snapshot_values(m);
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        stop = true;
      }
    } else {
      res.best_epoch = epoch;
    }
    rec.seconds = std::chrono::duration<double>(clock::now() - epoch_start).count();
    res.epochs.push_back(rec);
    nlohmann::json j = {{"epoch", rec.epoch}, {"steps", rec.steps}, {"train_loss", rec.train_loss},
                        {"seconds", rec.seconds}};
    j["dev_em"] = rec.dev_em ? nlohmann::json(*rec.dev_em) : nlohmann::json(nullptr);
    if (log) log << j.dump() << '\n' << std::flush;
    if (cfg.on_epoch) cfg.on_epoch(j);
    if (cfg.time_budget_seconds > 0.0 &&
        std::chrono::duration<double>(clock::now() - start).count() > cfg.time_budget_seconds) {
      stop = true;
    }
  }
  if (!best.empty()) restore_values(m, best);
  return res;
}

Prediction predict(model::ParserModel& m, const TrainExample& ex, const kg::KnowledgeGraph& g) {
  Prediction p;
  auto f = featurize(m, ex);
  p.tokens = m.parse(f.input_ids, f.graph);
  p.sparql = model::realize(p.tokens, m.syntax_vocab(), ex.subgraph);
  try {
    p.answer = sparql::execute(g, sparql::parse_sparql(p.sparql));
  } catch (const std::exception&) {
    p.answer.reset();
  }
  return p;
}

std::vector<eval::TurnScore> evaluate(model::ParserModel& m, std::span<const TrainExample> examples,
                                      const kg::KnowledgeGraph& g, std::vector<Prediction>* predictions) {
  std::vector<eval::TurnScore> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    auto p = predict(m, ex, g);
    auto s = eval::score_turn(p.sparql, p.answer, ex.gold_sparql, ex.gold_answer);
    s.question_type = ex.question_type;
    s.turn_position = ex.turn_position;
    s.phenomena = ex.phenomena;
    s.unreachable = !ex.reachable;
    out.push_back(std::move(s));
    if (predictions) predictions->push_back(std::move(p));
  }
  return out;
}

double exact_match_rate(model::ParserModel& m, std::span<const TrainExample> examples) {
  if (examples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& ex : examples) {
    auto f = featurize(m, ex);
    auto toks = m.parse(f.input_ids, f.graph);
    hits += eval::exact_match(model::realize(toks, m.syntax_vocab(), ex.subgraph), ex.gold_sparql);
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

}  // namespace dcg::train
