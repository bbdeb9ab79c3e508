#pragma once

#include <string>

#include "valsteer/catalog.hpp"
#include "valsteer/graph.hpp"

namespace valsteer {

/// Parses the reference-graph exchange format: an `edges = [...]` block of
/// ['Cause', 'Effect'] pairs, plus an optional `nodes = [...]` list.
/// `#` starts a comment outside of quoted strings.
CausalGraph parse_edge_list(const std::string& text);

/// Same, then checks every node against the catalog's value ids.
CausalGraph parse_edge_list(const std::string& text, const Catalog& catalog);

std::string emit_edge_list(const CausalGraph& graph);

/// Reference digraph from value hierarchy tags: every unordered pair of
/// values sharing an upper dimension gets both directed edges.
CausalGraph hierarchy_graph(const Catalog& catalog);

} // namespace valsteer
