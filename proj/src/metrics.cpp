#include "valsteer/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace valsteer {

std::string to_string(ChangeMode mode) {
    return mode == ChangeMode::role ? "role" : "sae";
}

ChangeMode change_mode_from_string(const std::string& s) {
    if (s == "role") return ChangeMode::role;
    if (s == "sae") return ChangeMode::sae;
    throw InvalidParameter("mode must be 'role' or 'sae'");
}

namespace {

const OrientationMatrix::Row& baseline_row(const OrientationMatrix& matrix,
                                           const std::string& baseline_key) {
    if (!matrix.has_row(baseline_key))
        throw MissingBaseline("no baseline row '" + baseline_key + "' in matrix");
    return matrix.row(baseline_key);
}

bool row_in_mode(const OrientationMatrix::Row& row, ChangeMode mode,
                 const std::string& baseline_key, const std::string& baseline_role_id,
                 const MetricOptions& opts) {
    if (row.key == baseline_key) return false;
    if (mode == ChangeMode::role) return row.condition.kind == SteeringCondition::Kind::role;
    if (row.condition.kind != SteeringCondition::Kind::sae) return false;
    return opts.sae_any_role || row.condition.role_id == baseline_role_id;
}

const ScoreCell& defined_cell(const OrientationMatrix::Row& row, std::size_t col,
                              const std::string& what) {
    if (!row.cells[col])
        throw UndefinedCell("row '" + row.key + "' has no cell for " + what);
    return *row.cells[col];
}

} // namespace

ChangedSet changed_conditions(const OrientationMatrix& matrix, const std::string& v,
                              const std::string& baseline_key, ChangeMode mode,
                              const MetricOptions& opts) {
    const auto& base = baseline_row(matrix, baseline_key);
    const std::size_t col = matrix.column_index(v);
    const ScoreCell base_cell = defined_cell(base, col, "value '" + v + "'");

    ChangedSet out;
    for (const auto& row : matrix.rows()) {
        if (!row_in_mode(row, mode, baseline_key, base.condition.role_id, opts)) continue;
        if (!row.cells[col]) {
            ++out.excluded_undefined;
            continue;
        }
        ++out.eligible;
        if (cell_differs(*row.cells[col], base_cell, opts.epsilon)) out.changed.push_back(row.key);
    }
    return out;
}

namespace {

Rational change_rate_over(const OrientationMatrix& matrix, const ChangedSet& steered,
                          const std::string& v_prime, const OrientationMatrix::Row& base,
                          const MetricOptions& opts) {
    const std::size_t col = matrix.column_index(v_prime);
    const ScoreCell base_cell = defined_cell(base, col, "value '" + v_prime + "'");
    long long moved = 0;
    for (const auto& key : steered.changed) {
        const auto& row = matrix.row(key);
        const ScoreCell cell = defined_cell(row, col, "value '" + v_prime + "'");
        if (cell_differs(cell, base_cell, opts.epsilon)) ++moved;
    }
    return make_rational(moved, static_cast<long long>(steered.changed.size()));
}

std::optional<Rational> mean_rate_over_set(const CausalGraph& graph, const OrientationMatrix& matrix,
                                           const std::string& v, const std::string& baseline_key,
                                           ChangeMode mode, const MetricOptions& opts,
                                           bool over_successors) {
    if (!graph.has_node(v)) throw UnknownValue("graph has no node '" + v + "'");
    for (const auto& column : matrix.columns())
        if (!graph.has_node(column))
            throw UnknownValue("graph is missing matrix column '" + column + "'");

    const std::set<std::string> pool =
        over_successors ? successors(graph, v) : nonsuccessors(graph, v);
    std::vector<std::string> targets;
    for (const auto& node : pool)
        if (matrix.has_column(node)) targets.push_back(node);
    if (targets.empty()) return std::nullopt;

    const ChangedSet steered = changed_conditions(matrix, v, baseline_key, mode, opts);
    if (steered.changed.empty()) return std::nullopt;

    const auto& base = baseline_row(matrix, baseline_key);
    Rational acc(0);
    for (const auto& v_prime : targets) acc += change_rate_over(matrix, steered, v_prime, base, opts);
    return acc / Rational(BigInt(static_cast<long long>(targets.size())));
}

} // namespace

Rational change_rate(const OrientationMatrix& matrix, const std::string& v_prime,
                     const std::string& v, const std::string& baseline_key, ChangeMode mode,
                     const MetricOptions& opts) {
    const ChangedSet steered = changed_conditions(matrix, v, baseline_key, mode, opts);
    if (steered.changed.empty())
        throw EmptySteeringSet("no " + to_string(mode) + " condition changed value '" + v + "'");
    return change_rate_over(matrix, steered, v_prime, baseline_row(matrix, baseline_key), opts);
}

std::optional<Rational> expected_accuracy(const CausalGraph& graph, const OrientationMatrix& matrix,
                                          const std::string& v, const std::string& baseline_key,
                                          ChangeMode mode, const MetricOptions& opts) {
    return mean_rate_over_set(graph, matrix, v, baseline_key, mode, opts, true);
}

std::optional<Rational> unexpected_frequency(const CausalGraph& graph,
                                             const OrientationMatrix& matrix, const std::string& v,
                                             const std::string& baseline_key, ChangeMode mode,
                                             const MetricOptions& opts) {
    return mean_rate_over_set(graph, matrix, v, baseline_key, mode, opts, false);
}

MetricReport aggregate_report(const CausalGraph& graph, const OrientationMatrix& matrix,
                              const std::string& baseline_key, ChangeMode mode,
                              const MetricOptions& opts) {
    MetricReport report;
    report.mode = mode;
    std::vector<Rational> expected, unexpected;
    for (const auto& v : matrix.columns()) {
        ValueMetrics m;
        m.changed_count = changed_conditions(matrix, v, baseline_key, mode, opts).changed.size();
        std::set<std::string> suc = successors(graph, v);
        std::size_t suc_in_matrix = 0;
        for (const auto& s : suc)
            if (matrix.has_column(s)) ++suc_in_matrix;
        m.successor_count = suc_in_matrix;
        m.expected_accuracy = expected_accuracy(graph, matrix, v, baseline_key, mode, opts);
        m.unexpected_frequency = unexpected_frequency(graph, matrix, v, baseline_key, mode, opts);
        if (m.expected_accuracy)
            expected.push_back(*m.expected_accuracy);
        else
            report.values_without_expected.push_back(v);
        if (m.unexpected_frequency)
            unexpected.push_back(*m.unexpected_frequency);
        else
            report.values_without_unexpected.push_back(v);
        report.per_value.emplace(v, std::move(m));
    }
    if (expected.empty() && unexpected.empty())
        throw NoDefinedMetrics("no value defines either metric under mode " + to_string(mode));
    if (!expected.empty()) report.macro_expected_accuracy = mean(expected);
    if (!unexpected.empty()) report.macro_unexpected_frequency = mean(unexpected);
    return report;
}

SteerCellStats cell_stats(const std::vector<std::pair<ScoreCell, ScoreCell>>& per_role_pairs,
                          double epsilon) {
    if (per_role_pairs.empty()) throw EmptyInput("no role pairs for cell stats");
    long long stim = 0;
    long long supp = 0;
    for (const auto& [unsteered, steered] : per_role_pairs) {
        if (!cell_differs(steered, unsteered, epsilon)) continue;
        const bool up = epsilon <= 0.0
                            ? steered.sum * unsteered.count > unsteered.sum * steered.count
                            : steered.mean_double() > unsteered.mean_double();
        (up ? stim : supp) += 1;
    }
    const long long n = static_cast<long long>(per_role_pairs.size());
    SteerCellStats stats;
    stats.p_stim = make_rational(stim, n);
    stats.p_supp = make_rational(supp, n);
    stats.p_maint = Rational(1) - stats.p_stim - stats.p_supp;
    return stats;
}

double cell_cosine(const SteerCellStats& a, const SteerCellStats& b) {
    const double av[3] = {to_double(a.p_stim), to_double(a.p_supp), to_double(a.p_maint)};
    const double bv[3] = {to_double(b.p_stim), to_double(b.p_supp), to_double(b.p_maint)};
    double dot = 0, na = 0, nb = 0;
    for (int k = 0; k < 3; ++k) {
        dot += av[k] * bv[k];
        na += av[k] * av[k];
        nb += bv[k] * bv[k];
    }
    return dot / std::sqrt(na * nb); // components sum to 1, so neither norm is 0
}

Rational noise_ratio(const SteerCellStats& stats) {
    return std::min(stats.p_stim, stats.p_supp);
}

Rational value_noise(const std::vector<SteerCellStats>& cells) {
    if (cells.empty()) throw EmptyInput("no cells for value-level noise");
    std::vector<Rational> noise;
    noise.reserve(cells.size());
    for (const auto& c : cells) noise.push_back(noise_ratio(c));
    return mean(noise);
}

std::size_t steered_count(const OrientationMatrix& matrix, const std::string& row_key,
                          const std::string& baseline_key, const MetricOptions& opts) {
    const auto& base = baseline_row(matrix, baseline_key);
    const auto& row = matrix.row(row_key);
    std::size_t count = 0;
    for (std::size_t c = 0; c < matrix.columns().size(); ++c) {
        if (!row.cells[c] || !base.cells[c]) continue;
        if (cell_differs(*row.cells[c], *base.cells[c], opts.epsilon)) ++count;
    }
    return count;
}

Rational mean_steered(const OrientationMatrix& matrix, ChangeMode mode,
                      const std::string& baseline_key, const MetricOptions& opts) {
    const auto& base = baseline_row(matrix, baseline_key);
    long long total = 0;
    long long rows = 0;
    for (const auto& row : matrix.rows()) {
        if (!row_in_mode(row, mode, baseline_key, base.condition.role_id, opts)) continue;
        total += static_cast<long long>(steered_count(matrix, row.key, baseline_key, opts));
        ++rows;
    }
    if (rows == 0) throw EmptyInput("no " + to_string(mode) + " conditions in matrix");
    return make_rational(total, rows);
}

Rational within_value_inverse_ratio(const std::vector<int>& question_deltas) {
    long long pos = 0;
    long long neg = 0;
    for (int d : question_deltas) {
        if (d > 0) ++pos;
        if (d < 0) ++neg;
    }
    if (pos + neg == 0) throw NoChanges("no changed questions in dyad");
    if (pos == neg) return make_rational(1, 2);
    return make_rational(std::min(pos, neg), pos + neg);
}

PairedReport compare_graphs(const CausalGraph& graph_a, const CausalGraph& graph_b,
                            const OrientationMatrix& matrix, const std::string& baseline_key,
                            ChangeMode mode, const MetricOptions& opts) {
    PairedReport out;
    out.report_a = aggregate_report(graph_a, matrix, baseline_key, mode, opts);
    out.report_b = aggregate_report(graph_b, matrix, baseline_key, mode, opts);
    for (const auto& [v, ma] : out.report_a.per_value) {
        const auto& mb = out.report_b.per_value.at(v);
        std::optional<Rational> d_exp, d_unexp;
        if (ma.expected_accuracy && mb.expected_accuracy)
            d_exp = *ma.expected_accuracy - *mb.expected_accuracy;
        if (ma.unexpected_frequency && mb.unexpected_frequency)
            d_unexp = *ma.unexpected_frequency - *mb.unexpected_frequency;
        out.deltas[v] = {d_exp, d_unexp};
    }
    return out;
}

namespace {

std::string feature_key_of(const SteeringCondition& c) {
    // strength formatting matches the condition key
    const std::string key = c.key(); // sae:<role>:L<layer>:f<feature>x<strength>
    const std::size_t pos = key.find(":L");
    return key.substr(pos + 1);
}

} // namespace

SteerTable build_steer_table(const OrientationMatrix& train_matrix,
                             const OrientationMatrix* test_matrix, const MetricOptions& opts) {
    SteerTable table;
    table.value_ids = train_matrix.columns();

    auto collect_pairs = [&](const OrientationMatrix& m, const std::string& feature_key,
                             const std::string& value_id) {
        std::vector<std::pair<ScoreCell, ScoreCell>> pairs;
        const std::size_t col = m.column_index(value_id);
        for (const auto& row : m.rows()) {
            if (row.condition.kind != SteeringCondition::Kind::sae) continue;
            if (feature_key_of(row.condition) != feature_key) continue;
            const std::string role_key = SteeringCondition::make_role(row.condition.role_id).key();
            if (!m.has_row(role_key)) continue;
            const auto& role_row = m.row(role_key);
            if (!row.cells[col] || !role_row.cells[col]) continue;
            pairs.emplace_back(*role_row.cells[col], *row.cells[col]);
        }
        return pairs;
    };

    std::set<std::string> feature_keys;
    for (const auto& row : train_matrix.rows())
        if (row.condition.kind == SteeringCondition::Kind::sae)
            feature_keys.insert(feature_key_of(row.condition));
    table.feature_keys.assign(feature_keys.begin(), feature_keys.end());

    std::map<std::string, std::vector<SteerCellStats>> per_value_cells;
    for (const auto& fk : table.feature_keys) {
        std::vector<double> cosines;
        for (const auto& v : table.value_ids) {
            auto train_pairs = collect_pairs(train_matrix, fk, v);
            if (train_pairs.empty()) continue;
            SteerTableCell cell;
            cell.train = cell_stats(train_pairs, opts.epsilon);
            cell.n_roles = train_pairs.size();
            if (test_matrix) {
                auto test_pairs = collect_pairs(*test_matrix, fk, v);
                if (!test_pairs.empty()) {
                    cell.test = cell_stats(test_pairs, opts.epsilon);
                    cell.cosine = cell_cosine(cell.train, *cell.test);
                    cosines.push_back(*cell.cosine);
                }
            }
            per_value_cells[v].push_back(cell.train);
            table.cells[fk][v] = std::move(cell);
        }
        if (cosines.empty()) {
            table.mean_similarity[fk] = std::nullopt;
        } else {
            double sum = 0;
            for (double c : cosines) sum += c;
            table.mean_similarity[fk] = sum / static_cast<double>(cosines.size());
        }
    }
    for (const auto& v : table.value_ids) {
        auto it = per_value_cells.find(v);
        if (it == per_value_cells.end())
            table.noise_row[v] = std::nullopt;
        else
            table.noise_row[v] = value_noise(it->second);
    }
    return table;
}

} // namespace valsteer
