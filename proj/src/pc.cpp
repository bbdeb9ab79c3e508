#include "valsteer/pc.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace valsteer {

void PcConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
    if (max_cond_size < 0) throw InvalidParameter("max_cond_size must be >= 0");
    if (ci_test == CiTest::permutation && n_perm < 100)
        throw InvalidParameter("permutation test needs n_perm >= 100");
}

namespace {

/// Visits the size-k subsets of `pool` (already sorted) in lexicographic
/// order; stops early when the visitor returns true.
bool for_each_subset(const std::vector<std::string>& pool, std::size_t k,
                     const std::function<bool(const std::vector<std::string>&)>& visit) {
    if (k > pool.size()) return false;
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    std::vector<std::string> subset(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = pool[pick[i]];
        if (visit(subset)) return true;
        if (k == 0) return false;
        // advance the combination
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (pick[i] != i + pool.size() - k) break;
            if (i == 0) return false;
        }
        if (pick[i] == i + pool.size() - k) return false;
        ++pick[i];
        for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
}

} // namespace

SkeletonResult pc_skeleton(const OrientationMatrix& matrix, const PcConfig& config) {
    config.validate();
    if (matrix.columns().size() < 2) throw InvalidParameter("pc needs at least two columns");

    std::vector<std::string> nodes = matrix.columns();
    std::sort(nodes.begin(), nodes.end());
    const std::size_t n = nodes.size();

    auto run_test = [&](const std::string& i, const std::string& j,
                        const std::vector<std::string>& cond) {
        if (config.ci_test == PcConfig::CiTest::permutation)
            return ci_test_permutation(matrix, i, j, cond, config.alpha, config.n_perm,
                                       config.perm_seed);
        return ci_test_fisher_z(matrix, i, j, cond, config.alpha);
    };

    // live adjacency, symmetric
    std::map<std::string, std::set<std::string>> adj;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            adj[nodes[a]].insert(nodes[b]);
            adj[nodes[b]].insert(nodes[a]);
        }

    SepSets sepsets;
    for (int level = 0; level <= config.max_cond_size; ++level) {
        // PC-stable: conditioning sets come from the adjacency frozen at the
        // start of the level, so removal order within a level cannot matter.
        const auto frozen = adj;
        bool any_candidate = false;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                const std::string& i = nodes[a];
                const std::string& j = nodes[b];
                if (!adj[i].count(j)) continue;
                const auto& base = config.stable_variant ? frozen : adj;
                bool removed = false;
                for (const std::string* first : {&i, &j}) {
                    const std::string& u = *first;
                    const std::string& v = (first == &i) ? j : i;
                    std::vector<std::string> pool(base.at(u).begin(), base.at(u).end());
                    pool.erase(std::remove(pool.begin(), pool.end(), v), pool.end());
                    if (pool.size() < static_cast<std::size_t>(level)) continue;
                    any_candidate = true;
                    removed = for_each_subset(
                        pool, static_cast<std::size_t>(level),
                        [&](const std::vector<std::string>& cond) {
                            const CiResult res = run_test(i, j, cond);
                            if (!res.independent) return false;
                            adj[i].erase(j);
                            adj[j].erase(i);
                            sepsets[{std::min(i, j), std::max(i, j)}] = cond;
                            return true;
                        });
                    if (removed) break;
                }
            }
        }
        if (!any_candidate) break;
    }

    CausalGraph skeleton = CausalGraph::make(CausalGraph::Kind::skeleton, nodes);
    for (const auto& [node, neighbors] : adj)
        for (const auto& other : neighbors)
            if (node < other) skeleton.add_undirected(node, other);
    return SkeletonResult{std::move(skeleton), std::move(sepsets)};
}

CausalGraph orient_cpdag(const CausalGraph& skeleton, const SepSets& sepsets) {
    if (skeleton.kind != CausalGraph::Kind::skeleton)
        throw InvalidGraph("orient_cpdag expects a skeleton");

    const auto& nodes = skeleton.nodes;
    // collider demands per unordered edge: candidate arrow directions
    std::map<std::array<std::string, 2>, std::set<std::string>> demands; // edge -> arrow heads
    for (const auto& k : nodes) {
        for (std::size_t a = 0; a < nodes.size(); ++a) {
            for (std::size_t b = a + 1; b < nodes.size(); ++b) {
                const std::string& i = nodes[a];
                const std::string& j = nodes[b];
                if (i == k || j == k) continue;
                if (!skeleton.adjacent(i, k) || !skeleton.adjacent(j, k)) continue;
                if (skeleton.adjacent(i, j)) continue;
                auto sep = sepsets.find({std::min(i, j), std::max(i, j)});
                if (sep == sepsets.end()) continue;
                if (std::count(sep->second.begin(), sep->second.end(), k)) continue;
                demands[{std::min(i, k), std::max(i, k)}].insert(k);
                demands[{std::min(j, k), std::max(j, k)}].insert(k);
            }
        }
    }

    CausalGraph cpdag = CausalGraph::make(CausalGraph::Kind::cpdag, nodes);
    cpdag.notes = skeleton.notes;
    for (const auto& e : skeleton.undirected_edges) {
        auto demand = demands.find(e);
        if (demand == demands.end() || demand->second.empty()) {
            cpdag.add_undirected(e[0], e[1]);
        } else if (demand->second.size() == 1) {
            const std::string& head = *demand->second.begin();
            const std::string& tail = (head == e[0]) ? e[1] : e[0];
            cpdag.add_directed(tail, head);
        } else {
            // contradictory v-structures: keep the edge undirected
            cpdag.add_undirected(e[0], e[1]);
            cpdag.notes.push_back("conflicting v-structure orientations on " + e[0] + " - " + e[1]);
        }
    }

    meek_closure(cpdag);
    return cpdag;
}

CausalGraph pc_discover(const OrientationMatrix& matrix, const PcConfig& config) {
    SkeletonResult sk = pc_skeleton(matrix, config);
    return orient_cpdag(sk.graph, sk.sepsets);
}

} // namespace valsteer
