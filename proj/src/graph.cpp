#include "valsteer/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

namespace valsteer {

using nlohmann::json;

std::string to_string(CausalGraph::Kind kind) {
    switch (kind) {
        case CausalGraph::Kind::skeleton: return "skeleton";
        case CausalGraph::Kind::cpdag: return "cpdag";
        case CausalGraph::Kind::dag: return "dag";
        case CausalGraph::Kind::digraph: return "digraph";
    }
    return "digraph";
}

CausalGraph::Kind graph_kind_from_string(const std::string& s) {
    if (s == "skeleton") return CausalGraph::Kind::skeleton;
    if (s == "cpdag") return CausalGraph::Kind::cpdag;
    if (s == "dag") return CausalGraph::Kind::dag;
    if (s == "digraph") return CausalGraph::Kind::digraph;
    throw ParseError("unknown graph kind '" + s + "'");
}

CausalGraph CausalGraph::make(Kind kind, std::vector<std::string> nodes) {
    CausalGraph g;
    g.kind = kind;
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    g.nodes = std::move(nodes);
    return g;
}

bool CausalGraph::has_node(const std::string& id) const {
    return std::binary_search(nodes.begin(), nodes.end(), id);
}

void CausalGraph::add_directed(const std::string& from, const std::string& to) {
    if (!has_node(from) || !has_node(to))
        throw UnknownNode("edge endpoint not in node set: " + from + " -> " + to);
    if (from == to) throw InvalidGraph("self-loop on '" + from + "'");
    directed_edges.insert({from, to});
}

void CausalGraph::add_undirected(const std::string& a, const std::string& b) {
    if (!has_node(a) || !has_node(b))
        throw UnknownNode("edge endpoint not in node set: " + a + " - " + b);
    if (a == b) throw InvalidGraph("self-loop on '" + a + "'");
    undirected_edges.insert({std::min(a, b), std::max(a, b)});
}

bool CausalGraph::adjacent(const std::string& a, const std::string& b) const {
    return directed_edges.count({a, b}) || directed_edges.count({b, a}) ||
           undirected_edges.count({std::min(a, b), std::max(a, b)});
}

void CausalGraph::validate() const {
    for (const auto& [from, to] : directed_edges) {
        if (from == to) throw InvalidGraph("self-loop on '" + from + "'");
        if (!has_node(from) || !has_node(to))
            throw InvalidGraph("dangling edge " + from + " -> " + to);
    }
    for (const auto& e : undirected_edges) {
        if (e[0] == e[1]) throw InvalidGraph("self-loop on '" + e[0] + "'");
        if (e[0] > e[1]) throw InvalidGraph("undirected edge not normalized");
        if (!has_node(e[0]) || !has_node(e[1]))
            throw InvalidGraph("dangling edge " + e[0] + " - " + e[1]);
    }
    if (kind == Kind::skeleton && !directed_edges.empty())
        throw InvalidGraph("skeleton must not contain directed edges");
    if (kind == Kind::dag) {
        if (!undirected_edges.empty()) throw InvalidGraph("dag must not contain undirected edges");
        if (!is_acyclic(*this)) throw InvalidGraph("dag contains a directed cycle");
    }
}

bool operator==(const CausalGraph& a, const CausalGraph& b) {
    return a.kind == b.kind && a.nodes == b.nodes && a.directed_edges == b.directed_edges &&
           a.undirected_edges == b.undirected_edges;
}

std::string serialize_graph(const CausalGraph& graph) {
    json directed = json::array();
    for (const auto& [f, t] : graph.directed_edges) directed.push_back({f, t});
    json undirected = json::array();
    for (const auto& e : graph.undirected_edges) undirected.push_back({e[0], e[1]});
    json j{{"kind", to_string(graph.kind)},
           {"nodes", graph.nodes},
           {"directed_edges", std::move(directed)},
           {"undirected_edges", std::move(undirected)},
           {"provenance", graph.notes}};
    return j.dump(2) + "\n";
}

CausalGraph parse_graph(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("graph file is not valid JSON: ") + e.what());
    }
    try {
        CausalGraph g = CausalGraph::make(graph_kind_from_string(j.at("kind").get<std::string>()),
                                          j.at("nodes").get<std::vector<std::string>>());
        for (const auto& e : j.at("directed_edges"))
            g.add_directed(e.at(0).get<std::string>(), e.at(1).get<std::string>());
        for (const auto& e : j.at("undirected_edges"))
            g.add_undirected(e.at(0).get<std::string>(), e.at(1).get<std::string>());
        if (j.contains("provenance")) g.notes = j.at("provenance").get<std::vector<std::string>>();
        g.validate();
        return g;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed graph file: ") + e.what());
    }
}

CausalGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open graph file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_graph(ss.str());
}

void save_graph(const CausalGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write graph file '" + path + "'");
    out << serialize_graph(graph);
}

namespace {

/// Index-based edge-mark view used by the orientation algorithms.
/// mark[u][v] && !mark[v][u] means u -> v; both set means u - v.
struct Pdag {
    std::vector<std::string> names;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<bool>> mark;

    explicit Pdag(const CausalGraph& g) : names(g.nodes) {
        for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
        mark.assign(names.size(), std::vector<bool>(names.size(), false));
        for (const auto& [f, t] : g.directed_edges) mark[index.at(f)][index.at(t)] = true;
        for (const auto& e : g.undirected_edges) {
            mark[index.at(e[0])][index.at(e[1])] = true;
            mark[index.at(e[1])][index.at(e[0])] = true;
        }
    }

    std::size_t size() const { return names.size(); }
    bool directed(std::size_t u, std::size_t v) const { return mark[u][v] && !mark[v][u]; }
    bool undirected(std::size_t u, std::size_t v) const { return mark[u][v] && mark[v][u]; }
    bool adjacent(std::size_t u, std::size_t v) const { return mark[u][v] || mark[v][u]; }
    void orient(std::size_t u, std::size_t v) { mark[u][v] = true; mark[v][u] = false; }

    CausalGraph to_graph(CausalGraph::Kind kind) const {
        CausalGraph g = CausalGraph::make(kind, names);
        for (std::size_t u = 0; u < size(); ++u) {
            for (std::size_t v = 0; v < size(); ++v) {
                if (u < v && undirected(u, v)) g.add_undirected(names[u], names[v]);
                if (directed(u, v)) g.add_directed(names[u], names[v]);
            }
        }
        return g;
    }
};

std::size_t meek_pass(Pdag& g) {
    const std::size_t n = g.size();
    std::size_t oriented = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (!g.undirected(a, b)) continue;
                bool orient_ab = false;
                // R1: c -> a, a - b, c and b non-adjacent  =>  a -> b
                for (std::size_t c = 0; c < n && !orient_ab; ++c)
                    if (g.directed(c, a) && !g.adjacent(c, b)) orient_ab = true;
                // R2: a -> c -> b with a - b  =>  a -> b
                for (std::size_t c = 0; c < n && !orient_ab; ++c)
                    if (g.directed(a, c) && g.directed(c, b)) orient_ab = true;
                // R3: a - c, a - d, c -> b, d -> b, c and d non-adjacent  =>  a -> b
                for (std::size_t c = 0; c < n && !orient_ab; ++c) {
                    if (!(g.undirected(a, c) && g.directed(c, b))) continue;
                    for (std::size_t d = c + 1; d < n && !orient_ab; ++d)
                        if (g.undirected(a, d) && g.directed(d, b) && !g.adjacent(c, d))
                            orient_ab = true;
                }
                // R4: a - d, d -> c, c -> b, a and c adjacent, b and d non-adjacent  =>  a -> b
                for (std::size_t d = 0; d < n && !orient_ab; ++d) {
                    if (!(g.undirected(a, d) && !g.adjacent(b, d))) continue;
                    for (std::size_t c = 0; c < n && !orient_ab; ++c)
                        if (g.directed(d, c) && g.directed(c, b) && g.adjacent(a, c))
                            orient_ab = true;
                }
                if (orient_ab) {
                    g.orient(a, b);
                    ++oriented;
                    changed = true;
                }
            }
        }
    }
    return oriented;
}

/// Dor-Tarsi: finds a consistent extension of a PDAG, or nullopt.
std::optional<Pdag> consistent_extension(const Pdag& input) {
    Pdag work = input;
    Pdag result = input;
    const std::size_t n = input.size();
    std::vector<bool> active(n, true);
    for (std::size_t removed = 0; removed < n; ++removed) {
        bool found = false;
        for (std::size_t x = 0; x < n && !found; ++x) {
            if (!active[x]) continue;
            bool sink = true;
            for (std::size_t y = 0; y < n && sink; ++y)
                if (active[y] && work.directed(x, y)) sink = false;
            if (!sink) continue;
            // every undirected neighbor of x must be adjacent to all other
            // neighbors of x, so orienting into x creates no collider
            bool ok = true;
            for (std::size_t y = 0; y < n && ok; ++y) {
                if (!active[y] || !work.undirected(x, y)) continue;
                for (std::size_t z = 0; z < n && ok; ++z) {
                    if (!active[z] || z == y || z == x) continue;
                    if (work.adjacent(x, z) && !work.adjacent(y, z)) ok = false;
                }
            }
            if (!ok) continue;
            for (std::size_t y = 0; y < n; ++y) {
                if (active[y] && work.undirected(x, y)) result.orient(y, x);
                work.mark[x][y] = false;
                work.mark[y][x] = false;
            }
            active[x] = false;
            found = true;
        }
        if (!found) return std::nullopt;
    }
    return result;
}

} // namespace

std::size_t meek_closure(CausalGraph& graph) {
    Pdag g(graph);
    const std::size_t oriented = meek_pass(g);
    CausalGraph out = g.to_graph(graph.kind);
    out.notes = graph.notes;
    graph = std::move(out);
    return oriented;
}

std::vector<std::array<std::string, 3>> v_structures(const CausalGraph& graph) {
    Pdag g(graph);
    std::vector<std::array<std::string, 3>> out;
    const std::size_t n = g.size();
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (i != k && j != k && g.directed(i, k) && g.directed(j, k) && !g.adjacent(i, j))
                    out.push_back({g.names[i], g.names[k], g.names[j]});
    return out;
}

namespace {

std::set<std::string> reachable_from(const CausalGraph& graph, const std::string& v) {
    std::map<std::string, std::vector<std::string>> out_edges;
    for (const auto& [f, t] : graph.directed_edges) out_edges[f].push_back(t);
    std::set<std::string> seen;
    std::deque<std::string> queue;
    for (const auto& t : out_edges[v]) queue.push_back(t);
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        if (!seen.insert(cur).second) continue;
        for (const auto& t : out_edges[cur]) queue.push_back(t);
    }
    return seen;
}

} // namespace

std::set<std::string> successors(const CausalGraph& graph, const std::string& v) {
    if (graph.kind != CausalGraph::Kind::dag && graph.kind != CausalGraph::Kind::digraph)
        throw InvalidGraph("successor queries need a dag or digraph");
    if (!graph.has_node(v)) throw UnknownNode("no node '" + v + "'");
    return reachable_from(graph, v);
}

std::set<std::string> nonsuccessors(const CausalGraph& graph, const std::string& v) {
    const std::set<std::string> suc = successors(graph, v);
    std::set<std::string> out;
    for (const auto& node : graph.nodes)
        if (node != v && !suc.count(node)) out.insert(node);
    return out;
}

bool is_acyclic(const CausalGraph& graph) {
    // Kahn's algorithm over the directed part
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> out_edges;
    for (const auto& node : graph.nodes) indegree[node] = 0;
    for (const auto& [f, t] : graph.directed_edges) {
        out_edges[f].push_back(t);
        indegree[t] += 1;
    }
    std::deque<std::string> queue;
    for (const auto& [node, deg] : indegree)
        if (deg == 0) queue.push_back(node);
    std::size_t visited = 0;
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        ++visited;
        for (const auto& t : out_edges[cur])
            if (--indegree[t] == 0) queue.push_back(t);
    }
    return visited == graph.nodes.size();
}

CausalGraph transitive_reduction(const CausalGraph& dag) {
    if (dag.kind != CausalGraph::Kind::dag)
        throw InvalidGraph("transitive reduction is defined on DAGs only");
    dag.validate();

    std::map<std::string, std::set<std::string>> reach;
    for (const auto& node : dag.nodes) reach[node] = reachable_from(dag, node);

    CausalGraph out = CausalGraph::make(CausalGraph::Kind::dag, dag.nodes);
    out.notes = dag.notes;
    out.notes.push_back("transitive_reduction");
    for (const auto& [u, v] : dag.directed_edges) {
        bool redundant = false;
        for (const auto& [u2, w] : dag.directed_edges) {
            if (u2 != u || w == v) continue;
            if (reach[w].count(v)) {
                redundant = true;
                break;
            }
        }
        if (!redundant) out.add_directed(u, v);
    }
    return out;
}

CausalGraph cpdag_of_dag(const CausalGraph& dag) {
    if (dag.kind != CausalGraph::Kind::dag) throw InvalidGraph("cpdag_of_dag expects a dag");
    dag.validate();
    CausalGraph out = CausalGraph::make(CausalGraph::Kind::cpdag, dag.nodes);
    std::set<std::pair<std::string, std::string>> keep;
    for (const auto& vs : v_structures(dag)) {
        keep.insert({vs[0], vs[1]});
        keep.insert({vs[2], vs[1]});
    }
    for (const auto& [f, t] : dag.directed_edges) {
        if (keep.count({f, t}))
            out.add_directed(f, t);
        else
            out.add_undirected(f, t);
    }
    meek_closure(out);
    return out;
}

CausalGraph extend_to_dag(const CausalGraph& cpdag) {
    if (cpdag.kind != CausalGraph::Kind::cpdag && cpdag.kind != CausalGraph::Kind::dag)
        throw InvalidGraph("extend_to_dag expects a cpdag");
    if (cpdag.kind == CausalGraph::Kind::dag) {
        CausalGraph out = cpdag;
        return out;
    }

    Pdag g(cpdag);
    if (!consistent_extension(g)) throw NotExtendable("cpdag admits no consistent DAG extension");

    const std::size_t n = g.size();
    while (true) {
        meek_pass(g);
        bool any = false;
        for (std::size_t u = 0; u < n && !any; ++u) {
            for (std::size_t v = u + 1; v < n && !any; ++v) {
                if (!g.undirected(u, v)) continue;
                any = true;
                Pdag trial = g;
                trial.orient(u, v);
                if (consistent_extension(trial)) {
                    g = std::move(trial);
                } else {
                    g.orient(v, u); // the opposite direction must extend
                }
            }
        }
        if (!any) break;
    }

    CausalGraph out = g.to_graph(CausalGraph::Kind::dag);
    out.notes = cpdag.notes;
    out.notes.push_back("extended to dag, lexicographic tie-break");
    out.validate();
    return out;
}

CausalGraph extend_to_dag_or_best_effort(const CausalGraph& cpdag) {
    try {
        return extend_to_dag(cpdag);
    } catch (const NotExtendable&) {
    }

    // Sink-first ordering over the directed part: nodes with no outgoing
    // directed edge among the remainder go last, so surviving arrows agree
    // with the order. Every skeleton edge is then oriented by the order.
    Pdag g(cpdag);
    const std::size_t n = g.size();
    std::vector<bool> remaining(n, true);
    std::vector<std::size_t> position(n, 0);
    for (std::size_t slot = n; slot > 0; --slot) {
        std::size_t best = n;
        std::size_t best_outgoing = n + 1;
        for (std::size_t y = 0; y < n; ++y) {
            if (!remaining[y]) continue;
            std::size_t outgoing = 0;
            for (std::size_t z = 0; z < n; ++z)
                if (remaining[z] && g.directed(y, z)) ++outgoing;
            if (outgoing < best_outgoing) {
                best = y;
                best_outgoing = outgoing;
            }
        }
        position[best] = slot - 1;
        remaining[best] = false;
    }

    CausalGraph out = CausalGraph::make(CausalGraph::Kind::dag, cpdag.nodes);
    out.notes = cpdag.notes;
    out.notes.push_back("cpdag admitted no consistent extension; best-effort orientation");
    auto emit = [&](const std::string& a, const std::string& b) {
        const std::size_t pa = position[static_cast<std::size_t>(
            std::lower_bound(out.nodes.begin(), out.nodes.end(), a) - out.nodes.begin())];
        const std::size_t pb = position[static_cast<std::size_t>(
            std::lower_bound(out.nodes.begin(), out.nodes.end(), b) - out.nodes.begin())];
        if (pa < pb)
            out.add_directed(a, b);
        else
            out.add_directed(b, a);
    };
    for (const auto& [f, t] : cpdag.directed_edges) emit(f, t);
    for (const auto& e : cpdag.undirected_edges) emit(e[0], e[1]);
    out.validate();
    return out;
}

} // namespace valsteer
