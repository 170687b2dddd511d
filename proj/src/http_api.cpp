// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/service/http_api.hpp"

#include <httplib.h>

namespace dcg::service {

namespace {

void reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

}  // namespace

nlohmann::json meta_json(const Pipeline& p) {
  const auto c = p.resources().graph->counts();
  return {{"kg",
           {{"triples", c.triples}, {"entities", c.entities}, {"relations", c.relations}, {"types", c.types}}},
          {"checkpoint", p.parser().checkpoint_id()},
          {"t_max", p.config().t_max},
          {"type_linking", p.config().turn.graph.type_linking},
          {"top_k_entities", p.config().turn.top_k_entities}};
}

void mount_api(httplib::Server& srv, const Pipeline& p, SessionStore& store, const std::filesystem::path& ui_dir) {
  srv.Post("/api/session", [&store](const httplib::Request&, httplib::Response& res) {
    store.expire_idle();
    auto s = store.create();
    reply(res, 200, {{"session_id", s->id}});
  });

  srv.Post(R"(/api/session/([0-9a-f]+)/utterance)", [&p, &store](const httplib::Request& req, httplib::Response& res) {
    auto s = store.get(req.matches[1]);
    if (!s) return error(res, 404, "unknown_session", "no such session");
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("text") || !body["text"].is_string()) {
      return error(res, 400, "bad_request", "expected a JSON object with a string field 'text'");
    }
    try {
      auto rec = p.step(*s, body["text"].get<std::string>());
      reply(res, 200, to_json(rec, *p.resources().graph));
    } catch (const EmptyUtterance& e) {
      error(res, 400, "empty_utterance", e.what());
    } catch (const std::exception& e) {
      error(res, 500, "pipeline_failure", e.what());
    }
  });

  srv.Get(R"(/api/session/([0-9a-f]+)/history)", [&p, &store](const httplib::Request& req, httplib::Response& res) {
    auto s = store.get(req.matches[1]);
    if (!s) return error(res, 404, "unknown_session", "no such session");
    nlohmann::json turns = nlohmann::json::array();
    {
      std::lock_guard lock(s->mu);
      for (const auto& r : s->transcript) turns.push_back(to_json(r, *p.resources().graph));
    }
    reply(res, 200, {{"session_id", s->id}, {"turns", std::move(turns)}});
  });

  srv.Get("/api/meta", [&p](const httplib::Request&, httplib::Response& res) { reply(res, 200, meta_json(p)); });

  if (!ui_dir.empty()) srv.set_mount_point("/", ui_dir.string());
}

}  // namespace dcg::service
