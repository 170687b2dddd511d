// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors
//
// JSON endpoints:
//   POST /api/session                    -> {session_id}
//   POST /api/session/{id}/utterance     {text} -> turn record
//   GET  /api/session/{id}/history       -> {session_id, turns:[...]}
//   GET  /api/meta                       -> {kg, checkpoint, t_max}

#pragma once

#include <filesystem>

#include <json.hpp>

#include "dcg/service/session.hpp"

namespace httplib {
class Server;
}

namespace dcg::service {

nlohmann::json meta_json(const Pipeline& p);

// Registers the API routes; `ui_dir`, when non-empty, is served at "/".
void mount_api(httplib::Server& srv, const Pipeline& p, SessionStore& store,
               const std::filesystem::path& ui_dir = {});

}  // namespace dcg::service
