#include "valsteer/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>

#include <json.hpp>

#include "valsteer/detail/rng.hpp"

namespace valsteer {

using nlohmann::json;

void ScmSpec::validate() const {
    if (dag.kind != CausalGraph::Kind::dag) throw InvalidGraph("scm needs a dag");
    dag.validate();
    if (!(noise_scale > 0.0)) throw InvalidParameter("noise_scale must be > 0");
    if (question_count < 1) throw InvalidParameter("question_count must be >= 1");
    for (const auto& [edge, w] : edge_weights) {
        if (!dag.directed_edges.count(edge))
            throw InvalidGraph("weight for absent edge " + edge.first + " -> " + edge.second);
        if (!std::isfinite(w)) throw InvalidParameter("edge weight must be finite");
    }
}

namespace {

std::string node_name(std::size_t index, std::size_t n) {
    std::size_t width = 1;
    for (std::size_t x = n; x >= 10; x /= 10) ++width;
    std::string digits = std::to_string(index + 1);
    return "v" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

std::vector<std::string> make_nodes(std::size_t n) {
    std::vector<std::string> nodes;
    nodes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) nodes.push_back(node_name(i, n));
    return nodes;
}

} // namespace

CausalGraph random_dag(std::size_t n_nodes, double expected_degree, std::uint64_t seed) {
    if (n_nodes < 1) throw InvalidParameter("need at least one node");
    if (expected_degree < 0) throw InvalidParameter("expected_degree must be >= 0");
    std::vector<std::string> order = make_nodes(n_nodes);
    CausalGraph g = CausalGraph::make(CausalGraph::Kind::dag, order);
    if (n_nodes == 1) return g;

    std::mt19937_64 rng(detail::mix_seed(seed, "dag"));
    detail::shuffle(order, rng); // topological order
    const double p = std::min(1.0, expected_degree / static_cast<double>(n_nodes - 1));
    for (std::size_t a = 0; a < n_nodes; ++a)
        for (std::size_t b = a + 1; b < n_nodes; ++b)
            if (detail::uniform01(rng) < p) g.add_directed(order[a], order[b]);
    return g;
}

CausalGraph random_dag_matching(const std::vector<std::string>& nodes, std::size_t n_edges,
                                std::uint64_t seed) {
    std::vector<std::string> order = nodes;
    std::sort(order.begin(), order.end());
    CausalGraph g = CausalGraph::make(CausalGraph::Kind::dag, order);
    const std::size_t n = order.size();
    const std::size_t max_edges = n * (n - 1) / 2;
    if (n_edges > max_edges) throw InvalidParameter("too many edges for an acyclic graph");

    std::mt19937_64 rng(detail::mix_seed(seed, "matched-dag"));
    detail::shuffle(order, rng);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(max_edges);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    auto chosen = detail::sample_without_replacement(pairs, n_edges, rng);
    for (const auto& [a, b] : chosen) g.add_directed(order[a], order[b]);
    g.notes.push_back("degree-matched random reference");
    return g;
}

ScmSpec make_world(std::size_t n_nodes, double expected_degree, std::uint64_t seed) {
    ScmSpec spec;
    spec.seed = seed;
    spec.dag = random_dag(n_nodes, expected_degree, seed);
    std::mt19937_64 rng(detail::mix_seed(seed, "weights"));
    for (const auto& edge : spec.dag.directed_edges) {
        const double magnitude = 0.5 + 0.3 * detail::uniform01(rng);
        const double sign = detail::uniform01(rng) < 0.5 ? -1.0 : 1.0;
        spec.edge_weights[edge] = sign * magnitude;
    }
    spec.validate();
    return spec;
}

std::string serialize_scm(const ScmSpec& spec) {
    json weights = json::array();
    for (const auto& [edge, w] : spec.edge_weights)
        weights.push_back({edge.first, edge.second, w});
    json j{{"dag", json::parse(serialize_graph(spec.dag))},
           {"edge_weights", std::move(weights)},
           {"noise_scale", spec.noise_scale},
           {"shift_scale", spec.shift_scale},
           {"question_count", spec.question_count},
           {"role_target_count", spec.role_target_count},
           {"sae_target_count", spec.sae_target_count},
           {"seed", spec.seed}};
    return j.dump(2) + "\n";
}

ScmSpec parse_scm(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scm file is not valid JSON: ") + e.what());
    }
    try {
        ScmSpec spec;
        spec.dag = parse_graph(j.at("dag").dump());
        for (const auto& e : j.at("edge_weights"))
            spec.edge_weights[{e.at(0).get<std::string>(), e.at(1).get<std::string>()}] =
                e.at(2).get<double>();
        spec.noise_scale = j.at("noise_scale").get<double>();
        spec.shift_scale = j.at("shift_scale").get<double>();
        spec.question_count = j.at("question_count").get<int>();
        spec.role_target_count = j.at("role_target_count").get<double>();
        spec.sae_target_count = j.at("sae_target_count").get<double>();
        spec.seed = j.at("seed").get<std::uint64_t>();
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed scm file: ") + e.what());
    }
}

namespace {

/// Independent per-node Bernoulli targets with expected total `target_count`,
/// each hit shifted by +-shift_scale. Independence across nodes keeps the
/// interventional mixture faithful to the dag.
std::map<std::string, double> draw_shifts(const ScmSpec& spec, const std::string& tag,
                                          double target_count) {
    std::map<std::string, double> shifts;
    const double p = std::min(1.0, target_count / static_cast<double>(spec.dag.nodes.size()));
    std::mt19937_64 rng(detail::mix_seed(spec.seed, "shift", tag));
    for (const auto& node : spec.dag.nodes) {
        if (detail::uniform01(rng) >= p) continue;
        const double sign = detail::uniform01(rng) < 0.5 ? -1.0 : 1.0;
        shifts[node] = sign * spec.shift_scale;
    }
    return shifts;
}

std::string synth_role_id(std::size_t role_index) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "r%03zu", role_index);
    return buf;
}

} // namespace

SynthCondition baseline_condition(const ScmSpec& spec) {
    (void)spec;
    SynthCondition c;
    c.condition = SteeringCondition::make_role(synth_role_id(0));
    return c;
}

SynthCondition role_condition(const ScmSpec& spec, std::size_t role_index) {
    if (role_index == 0) return baseline_condition(spec);
    SynthCondition c;
    c.condition = SteeringCondition::make_role(synth_role_id(role_index));
    c.shifts = draw_shifts(spec, "role:" + std::to_string(role_index), spec.role_target_count);
    return c;
}

SynthCondition feature_condition(const ScmSpec& spec, std::size_t feature_index) {
    SynthCondition c;
    c.condition = SteeringCondition::make_sae(synth_role_id(0),
                                              static_cast<long long>(feature_index), 12, 100.0);
    c.shifts = draw_shifts(spec, "feature:" + std::to_string(feature_index), spec.sae_target_count);
    return c;
}

SynthCondition compose(const ScmSpec& spec, const SynthCondition& role,
                       const SynthCondition& feature) {
    (void)spec;
    if (feature.condition.kind != SteeringCondition::Kind::sae)
        throw InvalidParameter("compose expects a feature condition");
    SynthCondition c;
    c.condition = SteeringCondition::make_sae(role.condition.role_id, feature.condition.feature_id,
                                              feature.condition.layer, feature.condition.strength);
    c.shifts = role.shifts;
    for (const auto& [node, delta] : feature.shifts) c.shifts[node] += delta;
    return c;
}

std::vector<SynthCondition> cross_conditions(const ScmSpec& spec, std::size_t n_roles,
                                             std::size_t n_features) {
    std::vector<SynthCondition> out;
    out.reserve(n_roles * n_features);
    for (std::size_t r = 0; r < n_roles; ++r) {
        const SynthCondition role = role_condition(spec, r);
        for (std::size_t f = 0; f < n_features; ++f)
            out.push_back(compose(spec, role, feature_condition(spec, f)));
    }
    return out;
}

std::vector<SynthCondition> independent_cross_conditions(const ScmSpec& spec, std::size_t n_roles,
                                                         std::size_t n_features) {
    std::vector<SynthCondition> out;
    out.reserve(n_roles * n_features);
    for (std::size_t r = 0; r < n_roles; ++r) {
        for (std::size_t f = 0; f < n_features; ++f) {
            const std::string tag = std::to_string(r) + "_" + std::to_string(f);
            SynthCondition c;
            c.condition = SteeringCondition::make_sae("x" + tag, static_cast<long long>(f), 12,
                                                      100.0);
            c.shifts = draw_shifts(spec, "xrole:" + tag, spec.role_target_count);
            for (const auto& [node, delta] :
                 draw_shifts(spec, "xfeat:" + tag, spec.sae_target_count))
                c.shifts[node] += delta;
            out.push_back(std::move(c));
        }
    }
    return out;
}

namespace {

std::vector<std::string> topological_order(const CausalGraph& dag) {
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> out_edges;
    for (const auto& node : dag.nodes) indegree[node] = 0;
    for (const auto& [f, t] : dag.directed_edges) {
        out_edges[f].push_back(t);
        indegree[t] += 1;
    }
    std::deque<std::string> ready;
    for (const auto& [node, deg] : indegree)
        if (deg == 0) ready.push_back(node);
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string cur = ready.front();
        ready.pop_front();
        order.push_back(cur);
        for (const auto& t : out_edges[cur])
            if (--indegree[t] == 0) ready.push_back(t);
    }
    if (order.size() != dag.nodes.size()) throw InvalidGraph("cycle in scm dag");
    return order;
}

// Exogenous noise is seeded by the ROLE identity, not the full condition key:
// a feature row replays its role's noise and differs from the plain role row
// only through the feature's shifts. This mirrors temperature-0 questionnaire
// runs, where s_{r0} and the feature-steered s_{r0}^f come from the same
// underlying actor and untouched values stay exactly equal.
std::map<std::string, double> raw_row(const ScmSpec& spec, const std::vector<std::string>& topo,
                                      const std::map<std::string, std::vector<std::pair<std::string, double>>>& parents,
                                      const SynthCondition& cond, std::uint64_t row_index) {
    std::mt19937_64 rng(
        detail::mix_seed(spec.seed, "row", cond.condition.role_id, row_index));
    std::normal_distribution<double> noise(0.0, spec.noise_scale);
    std::map<std::string, double> x;
    for (const auto& node : topo) {
        double value = noise(rng);
        auto sh = cond.shifts.find(node);
        if (sh != cond.shifts.end()) value += sh->second;
        auto par = parents.find(node);
        if (par != parents.end())
            for (const auto& [p, w] : par->second) value += w * x.at(p);
        x[node] = value;
    }
    return x;
}

} // namespace

std::map<std::string, double> sample_raw_row(const ScmSpec& spec, const SynthCondition& condition,
                                             std::uint64_t row_index) {
    spec.validate();
    const auto topo = topological_order(spec.dag);
    std::map<std::string, std::vector<std::pair<std::string, double>>> parents;
    for (const auto& [edge, w] : spec.edge_weights) parents[edge.second].emplace_back(edge.first, w);
    return raw_row(spec, topo, parents, condition, row_index);
}

OrientationMatrix sample_dataset(const ScmSpec& spec, const std::vector<SynthCondition>& conditions,
                                 std::size_t rows_per_condition) {
    spec.validate();
    if (conditions.empty()) throw EmptyInput("no conditions to sample");
    if (rows_per_condition < 1) throw InvalidParameter("rows_per_condition must be >= 1");

    const auto topo = topological_order(spec.dag);
    std::map<std::string, std::vector<std::pair<std::string, double>>> parents;
    for (const auto& [edge, w] : spec.edge_weights) parents[edge.second].emplace_back(edge.first, w);

    std::vector<ValueDim> values;
    std::vector<QuestionItem> questions;
    for (const auto& node : spec.dag.nodes) {
        ValueDim v;
        v.id = node;
        v.name = node;
        for (int q = 0; q < spec.question_count; ++q) {
            QuestionItem item;
            item.id = node + ":q" + std::to_string(q + 1);
            item.value_id = node;
            item.text = "synthetic";
            item.polarity = +1;
            v.question_ids.push_back(item.id);
            questions.push_back(std::move(item));
        }
        values.push_back(std::move(v));
    }
    const Catalog catalog(std::move(values), std::move(questions));

    std::vector<std::pair<SteeringCondition, OrientationVector>> rows;
    rows.reserve(conditions.size() * rows_per_condition);
    for (const auto& cond : conditions) {
        for (std::size_t rep = 0; rep < rows_per_condition; ++rep) {
            SteeringCondition id = cond.condition;
            if (rows_per_condition > 1) id.role_id += "#" + std::to_string(rep);
            SynthCondition keyed{id, cond.shifts};
            const auto x = raw_row(spec, topo, parents, keyed, rep);
            OrientationVector vec;
            for (const auto& node : spec.dag.nodes) {
                const double mean = std::tanh(x.at(node));
                ScoreCell cell;
                cell.count = spec.question_count;
                cell.sum = std::llround(mean * spec.question_count);
                cell.sum = std::clamp<long long>(cell.sum, -cell.count, cell.count);
                vec[node] = cell;
            }
            rows.emplace_back(std::move(id), std::move(vec));
        }
    }
    return matrix_from_vectors(catalog, rows);
}

namespace {

std::set<std::array<std::string, 2>> skeleton_pairs(const CausalGraph& g) {
    std::set<std::array<std::string, 2>> pairs;
    for (const auto& [f, t] : g.directed_edges) pairs.insert({std::min(f, t), std::max(f, t)});
    for (const auto& e : g.undirected_edges) pairs.insert(e);
    return pairs;
}

} // namespace

RecoveryScore evaluate_recovery(const CausalGraph& truth_dag, const CausalGraph& discovered) {
    if (truth_dag.nodes != discovered.nodes)
        throw NodeMismatch("truth and discovered graphs cover different nodes");
    if (truth_dag.kind != CausalGraph::Kind::dag) throw InvalidGraph("truth must be a dag");

    const auto truth_skel = skeleton_pairs(truth_dag);
    const auto disc_skel = skeleton_pairs(discovered);
    std::size_t tp = 0;
    for (const auto& e : disc_skel)
        if (truth_skel.count(e)) ++tp;

    RecoveryScore score;
    if (!disc_skel.empty())
        score.skeleton_precision = make_rational(static_cast<long long>(tp),
                                                 static_cast<long long>(disc_skel.size()));
    if (!truth_skel.empty())
        score.skeleton_recall = make_rational(static_cast<long long>(tp),
                                              static_cast<long long>(truth_skel.size()));
    if (score.skeleton_precision && score.skeleton_recall) {
        const Rational sum = *score.skeleton_precision + *score.skeleton_recall;
        score.skeleton_f1 = sum == Rational(0)
                                ? Rational(0)
                                : Rational(2) * *score.skeleton_precision *
                                      *score.skeleton_recall / sum;
    }

    // orientation accuracy against the true equivalence class
    const CausalGraph truth_cpdag = cpdag_of_dag(truth_dag);
    std::size_t identifiable = 0;
    std::size_t correct = 0;
    for (const auto& [f, t] : truth_cpdag.directed_edges) {
        if (!disc_skel.count({std::min(f, t), std::max(f, t)})) continue;
        ++identifiable;
        if (discovered.directed_edges.count({f, t})) ++correct;
    }
    if (identifiable > 0)
        score.orientation_accuracy = make_rational(static_cast<long long>(correct),
                                                   static_cast<long long>(identifiable));
    return score;
}

} // namespace valsteer
