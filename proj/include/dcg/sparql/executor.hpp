// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include "dcg/kg/knowledge_graph.hpp"
#include "dcg/sparql/answer.hpp"
#include "dcg/sparql/query.hpp"

namespace dcg::sparql {

// Evaluates a validated query. Constants missing from the graph make their
// block produce no solutions. Within a block, triple patterns are joined
// most-bound first (ties keep input order); union branches are evaluated
// against the bindings produced so far and their results set-unioned.
Answer execute(const kg::KnowledgeGraph& g, const QueryAst& q);

}  // namespace dcg::sparql
