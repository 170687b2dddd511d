// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// Command-line entry point: synth, preprocess, train, eval, serve, repl.
// Every option may also be given as key=value in a --config file; flags on
// the command line override the file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "dcg/eval/metrics.hpp"
#include "dcg/kg/knowledge_graph.hpp"
#include "dcg/linker/entity_linker.hpp"
#include "dcg/service/http_api.hpp"
#include "dcg/service/session.hpp"
#include "dcg/train/preprocess.hpp"
#include "dcg/train/synthetic.hpp"
#include "dcg/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace dcg;

namespace {

struct Options {
  std::string kg_triples, kg_labels, instance_of = "P31";
  std::string corpus, out, checkpoint, report, popularity, metrics_log, ui_dir;
  std::uint64_t seed = 7;
  std::size_t interactions = 200, heldout_interactions = 50;
  double entity_scale = 1.0;
  std::size_t t_max = 5, top_k_entities = 0, node_cap = graph::kDefaultNodeCap, max_input_len = 128;
  bool no_type_linking = false;
  std::size_t d_model = 128, heads = 2, gat_heads = 2, ff_dim = 0, encoder_layers = 2, gat_layers = 2,
              decoder_layers = 2, max_decode_len = 64;
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, weight_decay = 0.01, clip_norm = 1.0, dev_fraction = 0.1,
         time_budget = 0.0, dropout = 0.1, name_shuffle = 0.5;
  bool no_gat_residual = false;
  std::size_t batch_size = 8, max_epochs = 100, patience = 5;
  std::string host = "127.0.0.1";
  int port = 8080;
  double session_timeout_min = 30.0;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
}

void require_file(const std::string& path, const char* flag) {
  require(path, flag);
  if (!fs::exists(path)) throw UsageError(std::string(flag) + ": no such file: " + path);
}

kg::KnowledgeGraph load_kg(const Options& o) {
  require_file(o.kg_triples, "--kg-triples");
  require_file(o.kg_labels, "--kg-labels");
  return kg::load_graph(o.kg_triples, o.kg_labels, o.instance_of);
}

std::vector<data::Interaction> load_corpus(const Options& o) {
  require_file(o.corpus, "--corpus");
  return data::read_corpus(o.corpus);
}

train::PreprocessConfig preprocess_config(const Options& o) {
  train::PreprocessConfig c;
  c.t_max = o.t_max;
  c.turn.top_k_entities = o.top_k_entities;
  c.turn.graph.type_linking = !o.no_type_linking;
  c.turn.graph.node_cap = o.node_cap;
  c.turn.max_input_len = o.max_input_len;
  return c;
}

std::string fingerprint(const ad::ParamStore& ps) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto* p : ps.all()) {
    for (double v : p->value.data) {
      const auto* b = reinterpret_cast<const unsigned char*>(&v);
      for (std::size_t i = 0; i < sizeof v; ++i) {
        h ^= b[i];
        h *= 1099511628211ULL;
      }
    }
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct LoadedCheckpoint {
  model::ParserModel model;
  linker::PopularityTable popularity;
  nlohmann::json meta;
};

LoadedCheckpoint load_checkpoint(const Options& o) {
  require(o.checkpoint, "--checkpoint");
  if (!fs::is_directory(o.checkpoint)) throw UsageError("--checkpoint: not a directory: " + o.checkpoint);
  fs::path dir(o.checkpoint);
  auto meta = nlohmann::json::parse(ad::read_checkpoint_metadata(dir));
  linker::PopularityTable pop;
  if (fs::exists(dir / "popularity.tsv")) pop = linker::PopularityTable::load(dir / "popularity.tsv");
  return {model::ParserModel::load(dir), std::move(pop), std::move(meta)};
}

// Pipeline settings stored with the checkpoint, overridden by explicit flags.
train::PreprocessConfig checkpoint_pipeline(const Options& o, const nlohmann::json& meta, const CLI::App& app) {
  auto c = preprocess_config(o);
  if (!meta.contains("pipeline")) return c;
  const auto& p = meta["pipeline"];
  if (!app.count("--t-max")) c.t_max = p.value("t_max", c.t_max);
  if (!app.count("--no-type-linking")) c.turn.graph.type_linking = p.value("type_linking", true);
  if (!app.count("--top-k-entities")) c.turn.top_k_entities = p.value("top_k_entities", c.turn.top_k_entities);
  if (!app.count("--node-cap")) c.turn.graph.node_cap = p.value("node_cap", c.turn.graph.node_cap);
  if (!app.count("--max-input-len")) c.turn.max_input_len = p.value("max_input_len", c.turn.max_input_len);
  return c;
}

int cmd_synth(const Options& o) {
  require(o.out, "--out");
  train::SyntheticConfig c;
  c.seed = o.seed;
  c.interactions = o.interactions;
  c.heldout_interactions = o.heldout_interactions;
  c.entity_scale = o.entity_scale;
  auto corpus = train::make_synthetic_corpus(c);
  train::write_synthetic_corpus(corpus, o.out);
  auto n = corpus.graph.counts();
  std::cout << "wrote " << o.out << ": " << n.triples << " triples, " << corpus.train.size() << " train / "
            << corpus.heldout.size() << " held-out interactions\n";
  return 0;
}

int cmd_preprocess(const Options& o) {
  auto g = load_kg(o);
  auto corpus = load_corpus(o);
  require(o.out, "--out");
  auto pop = o.popularity.empty() ? linker::build_popularity(corpus) : linker::PopularityTable::load(o.popularity);
  linker::EntityMatcher matcher(g);
  pipeline::KgResources res{&g, &matcher, &pop};
  train::PreprocessStats st;
  auto examples = train::preprocess(corpus, res, preprocess_config(o), &st);
  const auto syntax = model::default_syntax_vocab();
  std::ofstream out(o.out);
  if (!out) throw std::runtime_error("cannot write " + o.out);
  for (const auto& ex : examples) {
    nlohmann::json gold = nlohmann::json::array();
    for (const auto& t : ex.gold) {
      gold.push_back(t.tag == model::OutputToken::Tag::syntax ? syntax.symbol(t.index)
                                                              : "<node:" + ex.subgraph.nodes()[t.index].element + ">");
    }
    out << nlohmann::json{{"interaction_id", ex.interaction_id}, {"turn", ex.turn_position},
                          {"input", ex.input},                   {"gold_sparql", ex.gold_sparql},
                          {"gold_tokens", gold},                 {"reachable", ex.reachable},
                          {"missing", ex.missing},               {"question_type", ex.question_type},
                          {"subgraph", graph::snapshot(ex.subgraph)}}
               .dump()
        << '\n';
  }
  std::cout << st.examples << " examples, " << st.unreachable << " unreachable (" << st.too_large
            << " over node cap)\n";
  return 0;
}

int cmd_train(const Options& o) {
  auto g = load_kg(o);
  auto corpus = load_corpus(o);
  require(o.out, "--out");
  auto pop = linker::build_popularity(corpus);
  linker::EntityMatcher matcher(g);
  pipeline::KgResources res{&g, &matcher, &pop};
  auto pcfg = preprocess_config(o);
  train::PreprocessStats st;
  auto examples = train::preprocess(corpus, res, pcfg, &st);
  std::vector<train::TrainExample> tr, dev;
  for (auto& ex : examples) (train::in_dev_split(ex.interaction_id, o.dev_fraction) ? dev : tr).push_back(ex);
  std::cerr << "examples: " << tr.size() << " train, " << dev.size() << " dev, " << st.unreachable
            << " unreachable\n";

  model::ModelConfig mc;
  mc.d_model = o.d_model;
  mc.heads = o.heads;
  mc.gat_heads = o.gat_heads;
  mc.ff_dim = o.ff_dim ? o.ff_dim : 2 * o.d_model;
  mc.encoder_layers = o.encoder_layers;
  mc.gat_layers = o.gat_layers;
  mc.decoder_layers = o.decoder_layers;
  mc.max_input_len = o.max_input_len;
  mc.max_decode_len = o.max_decode_len;
  mc.dropout = o.dropout;
  mc.gat_residual = !o.no_gat_residual;
  mc.seed = o.seed;
  model::ParserModel m(mc, train::build_text_vocab(examples, g), model::default_syntax_vocab());

  train::TrainConfig tc;
  tc.optimizer.learning_rate = o.lr;
  tc.optimizer.beta1 = o.beta1;
  tc.optimizer.beta2 = o.beta2;
  tc.optimizer.weight_decay = o.weight_decay;
  tc.batch_size = o.batch_size;
  tc.max_epochs = o.max_epochs;
  tc.patience = o.patience;
  tc.clip_norm = o.clip_norm;
  tc.seed = o.seed;
  tc.time_budget_seconds = o.time_budget;
  if (o.name_shuffle > 0.0) tc.name_pool = train::name_tokens(g, m.text_vocab());
  tc.name_shuffle = o.name_shuffle;
  tc.metrics_log = o.metrics_log.empty() ? fs::path(o.out) / "metrics.jsonl" : fs::path(o.metrics_log);
  tc.on_epoch = [](const nlohmann::json& j) { std::cerr << j.dump() << '\n'; };
  auto result = train::train(m, tr, dev, tc);

  nlohmann::json meta;
  meta["checkpoint_id"] = "dcg-" + fingerprint(m.params());
  meta["pipeline"] = {{"t_max", pcfg.t_max},
                      {"type_linking", pcfg.turn.graph.type_linking},
                      {"top_k_entities", pcfg.turn.top_k_entities},
                      {"node_cap", pcfg.turn.graph.node_cap},
                      {"max_input_len", pcfg.turn.max_input_len},
                      {"instance_of", o.instance_of}};
  meta["training"] = {{"epochs", result.epochs.size()}, {"steps", result.steps}, {"best_epoch", result.best_epoch}};
  meta["training"]["best_dev_em"] = result.best_dev_em ? nlohmann::json(*result.best_dev_em) : nlohmann::json(nullptr);
  m.save(o.out, meta);
  pop.save(fs::path(o.out) / "popularity.tsv");
  std::cout << "saved checkpoint " << meta["checkpoint_id"].get<std::string>() << " to " << o.out << '\n';
  return 0;
}

int cmd_eval(const Options& o, const CLI::App& app) {
  auto g = load_kg(o);
  auto corpus = load_corpus(o);
  auto ck = load_checkpoint(o);
  linker::EntityMatcher matcher(g);
  pipeline::KgResources res{&g, &matcher, &ck.popularity};
  auto examples = train::preprocess(corpus, res, checkpoint_pipeline(o, ck.meta, app));
  auto scores = train::evaluate(ck.model, examples, g);
  auto report = eval::aggregate(scores);
  std::cout << report.to_table();
  if (!o.report.empty()) {
    std::ofstream(o.report) << report.to_json().dump(2) << '\n';
  }
  return 0;
}

struct Service {
  kg::KnowledgeGraph graph;
  linker::EntityMatcher matcher;
  LoadedCheckpoint ck;
  std::unique_ptr<service::NeuralParser> parser;
  std::unique_ptr<service::Pipeline> pipeline;
};

std::unique_ptr<Service> make_service(const Options& o, const CLI::App& app) {
  auto s = std::make_unique<Service>(Service{load_kg(o), {}, load_checkpoint(o), nullptr, nullptr});
  s->matcher = linker::EntityMatcher(s->graph);
  auto pc = checkpoint_pipeline(o, s->ck.meta, app);
  s->parser = std::make_unique<service::NeuralParser>(std::move(s->ck.model), s->ck.meta.value("checkpoint_id", o.checkpoint));
  service::PipelineConfig cfg{pc.t_max, pc.turn};
  s->pipeline = std::make_unique<service::Pipeline>(pipeline::KgResources{&s->graph, &s->matcher, &s->ck.popularity},
                                                    *s->parser, cfg);
  return s;
}

int cmd_serve(const Options& o, const CLI::App& app) {
  auto svc = make_service(o, app);
  service::SessionStore store(svc->pipeline->config().t_max,
                              std::chrono::seconds(static_cast<long>(o.session_timeout_min * 60.0)));
  httplib::Server srv;
  service::mount_api(srv, *svc->pipeline, store, o.ui_dir);
  int port = o.port;
  if (port == 0) {
    port = srv.bind_to_any_port(o.host);
  } else if (!srv.bind_to_port(o.host, port)) {
    port = -1;
  }
  if (port < 0) throw std::runtime_error("cannot bind " + o.host + ":" + std::to_string(o.port));
  std::cout << "listening on http://" << o.host << ":" << port << std::endl;
  srv.listen_after_bind();
  return 0;
}

int cmd_repl(const Options& o, const CLI::App& app) {
  auto svc = make_service(o, app);
  service::SessionStore store(svc->pipeline->config().t_max);
  auto session = store.create();
  std::string line;
  std::cout << "> " << std::flush;
  while (std::getline(std::cin, line)) {
    if (line == ":quit" || line == ":q") break;
    try {
      auto rec = svc->pipeline->step(*session, line);
      auto j = service::to_json(rec, svc->graph);
      std::cout << "sparql: " << rec.sparql << '\n';
      if (rec.answer) {
        std::cout << "answer: " << j["answer"].dump() << '\n';
      } else {
        std::cout << "answer: (unexecutable: " << rec.execution_error << ")\n";
      }
      std::cout << "subgraph: " << j["subgraph"]["nodes"].size() << " nodes\n";
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << '\n';
    }
    std::cout << "> " << std::flush;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conversational semantic parsing over a knowledge graph with dynamic context subgraphs"};
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);
  Options o;

  app.add_option("--kg-triples", o.kg_triples, "Triples TSV (subject, predicate, object)");
  app.add_option("--kg-labels", o.kg_labels, "Labels TSV (id, label)");
  app.add_option("--instance-of", o.instance_of, "Relation id marking types")->capture_default_str();
  app.add_option("--corpus", o.corpus, "Interactions, one JSON object per line");
  app.add_option("--out", o.out, "Output file or directory");
  app.add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
  app.add_option("--report", o.report, "Write the evaluation report as JSON");
  app.add_option("--popularity", o.popularity, "Popularity TSV (default: counted from --corpus)");
  app.add_option("--metrics-log", o.metrics_log, "Training metrics JSONL (default: <out>/metrics.jsonl)");
  app.add_option("--ui-dir", o.ui_dir, "Static files served at / by serve");
  app.add_option("--seed", o.seed)->capture_default_str();
  app.add_option("--interactions", o.interactions)->capture_default_str();
  app.add_option("--heldout-interactions", o.heldout_interactions)->capture_default_str();
  app.add_option("--entity-scale", o.entity_scale)->capture_default_str();
  app.add_option("--t-max", o.t_max, "Context window in turns")->capture_default_str();
  app.add_option("--top-k-entities", o.top_k_entities, "Keep the K most popular candidates (0: disambiguate)")
      ->capture_default_str();
  app.add_flag("--no-type-linking", o.no_type_linking, "Disable the type-link subgraph");
  app.add_option("--node-cap", o.node_cap)->capture_default_str();
  app.add_option("--max-input-len", o.max_input_len)->capture_default_str();
  app.add_option("--d-model", o.d_model)->capture_default_str();
  app.add_option("--heads", o.heads)->capture_default_str();
  app.add_option("--gat-heads", o.gat_heads)->capture_default_str();
  app.add_option("--ff-dim", o.ff_dim, "Feed-forward width (0: 2 * d-model)")->capture_default_str();
  app.add_option("--encoder-layers", o.encoder_layers)->capture_default_str();
  app.add_option("--gat-layers", o.gat_layers)->capture_default_str();
  app.add_option("--decoder-layers", o.decoder_layers)->capture_default_str();
  app.add_option("--max-decode-len", o.max_decode_len)->capture_default_str();
  app.add_option("--dropout", o.dropout)->capture_default_str();
  app.add_flag("--no-gat-residual", o.no_gat_residual, "Feed each GAT layer's output on without the skip connection");
  app.add_option("--name-shuffle", o.name_shuffle, "Per-example probability of remapping proper-name tokens")
      ->capture_default_str();
  app.add_option("--lr", o.lr)->capture_default_str();
  app.add_option("--beta1", o.beta1)->capture_default_str();
  app.add_option("--beta2", o.beta2)->capture_default_str();
  app.add_option("--weight-decay", o.weight_decay)->capture_default_str();
  app.add_option("--clip-norm", o.clip_norm)->capture_default_str();
  app.add_option("--batch-size", o.batch_size)->capture_default_str();
  app.add_option("--max-epochs", o.max_epochs)->capture_default_str();
  app.add_option("--patience", o.patience)->capture_default_str();
  app.add_option("--dev-fraction", o.dev_fraction)->capture_default_str();
  app.add_option("--time-budget", o.time_budget, "Seconds; 0 means unlimited")->capture_default_str();
  app.add_option("--host", o.host)->capture_default_str();
  app.add_option("--port", o.port, "0 picks a free port")->capture_default_str();
  app.add_option("--session-timeout-min", o.session_timeout_min)->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate the synthetic KG and interactions");
  auto* prep = app.add_subcommand("preprocess", "Replay interactions into training examples");
  auto* train_cmd = app.add_subcommand("train", "Train a parser checkpoint");
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on a corpus");
  auto* serve = app.add_subcommand("serve", "Serve the HTTP/JSON API");
  auto* repl = app.add_subcommand("repl", "Interactive session on the terminal");
  for (auto* s : {synth, prep, train_cmd, eval_cmd, serve, repl}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*prep) return cmd_preprocess(o);
    if (*train_cmd) return cmd_train(o);
    if (*eval_cmd) return cmd_eval(o, app);
    if (*serve) return cmd_serve(o, app);
    if (*repl) return cmd_repl(o, app);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
