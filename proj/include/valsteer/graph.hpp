#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "valsteer/errors.hpp"

namespace valsteer {

/// Directed/partially directed graph over value dimensions.
struct CausalGraph {
    enum class Kind { skeleton, cpdag, dag, digraph };

    Kind kind = Kind::digraph;
    std::vector<std::string> nodes;                          // sorted, unique
    std::set<std::pair<std::string, std::string>> directed_edges;
    std::set<std::array<std::string, 2>> undirected_edges;   // stored with first < second
    std::vector<std::string> notes;                          // provenance and warnings

    static CausalGraph make(Kind kind, std::vector<std::string> nodes);

    void add_directed(const std::string& from, const std::string& to);
    void add_undirected(const std::string& a, const std::string& b);
    bool has_node(const std::string& id) const;
    bool adjacent(const std::string& a, const std::string& b) const;

    /// Checks structural invariants for the declared kind; throws InvalidGraph.
    void validate() const;
};

std::string to_string(CausalGraph::Kind kind);
CausalGraph::Kind graph_kind_from_string(const std::string& s);

bool operator==(const CausalGraph& a, const CausalGraph& b);

std::string serialize_graph(const CausalGraph& graph);
CausalGraph parse_graph(const std::string& json_text);
CausalGraph load_graph(const std::string& path);
void save_graph(const CausalGraph& graph, const std::string& path);

/// Nodes reachable from v by one or more directed steps. On cyclic digraphs
/// v itself appears iff it lies on a directed cycle.
std::set<std::string> successors(const CausalGraph& graph, const std::string& v);

/// nodes \ ({v} ∪ successors(v)).
std::set<std::string> nonsuccessors(const CausalGraph& graph, const std::string& v);

bool is_acyclic(const CausalGraph& graph);

/// Unique minimal subgraph of a DAG with the same reachability relation.
CausalGraph transitive_reduction(const CausalGraph& dag);

/// Unshielded colliders (i, k, j): i -> k <- j with i, j non-adjacent; i < j.
std::vector<std::array<std::string, 3>> v_structures(const CausalGraph& graph);

/// Orients a CPDAG into a DAG that keeps its skeleton and v-structures.
/// Remaining choices are taken on the lexicographically smallest undirected
/// edge, smaller endpoint as source when consistent. Throws NotExtendable.
CausalGraph extend_to_dag(const CausalGraph& cpdag);

/// extend_to_dag when a consistent extension exists. Statistically imperfect
/// discovery output can be inconsistent (conflicting orientations, non-chordal
/// leftovers); this falls back to a skeleton-preserving sink-first orientation
/// that keeps as many discovered directions as it can and records a note.
CausalGraph extend_to_dag_or_best_effort(const CausalGraph& cpdag);

/// Closes a partially directed graph under Meek rules R1-R4 (in place).
/// Returns the number of edges oriented.
std::size_t meek_closure(CausalGraph& graph);

/// The CPDAG of a DAG's Markov equivalence class: v-structures kept directed,
/// Meek closure applied, everything else undirected.
CausalGraph cpdag_of_dag(const CausalGraph& dag);

} // namespace valsteer
