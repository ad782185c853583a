#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "thermoforge/config_graph.hpp"

namespace thermoforge::config {

/// Parses the bracket notation, e.g. "0 (1,2) (3)" or
/// "0 (1, 2 (3,4) (5)) (7) (8 (9,10)) (11)".
///
/// Parentheses open a branch, commas chain nodes in series inside a branch,
/// and parenthesized groups written after a node are that node's sub-branches.
/// Whitespace is insignificant. Throws ParseError (with offset) on malformed
/// syntax and ValidationError on duplicate labels.
ConfigGraph parse_notation(std::string_view text);

/// Canonical notation: branches of a node ordered by smallest contained label,
/// single-child nodes written as comma chains, one space before each branch.
std::string serialize(const ConfigGraph& graph);

/// {"edges": [[parent, child], ...]}
nlohmann::json to_json(const ConfigGraph& graph);
ConfigGraph graph_from_json(const nlohmann::json& j);

}  // namespace thermoforge::config
