#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "valsteer/graph.hpp"
#include "valsteer/matrix.hpp"
#include "valsteer/rational.hpp"

namespace valsteer {

/// Which conditions populate the steering sets: role prompts compared to the
/// baseline role, or SAE features applied to the baseline role.
enum class ChangeMode { role, sae };

std::string to_string(ChangeMode mode);
ChangeMode change_mode_from_string(const std::string& s);

struct MetricOptions {
    /// 0 compares cell means exactly; a positive value compares double means
    /// within epsilon, for matrices ingested from float sources.
    double epsilon = 0.0;
    /// sae mode normally draws from features applied to the baseline role;
    /// this admits feature rows on any role (per-role delta tables).
    bool sae_any_role = false;
};

/// Conditions of the mode whose orientation at v differs from the baseline's.
struct ChangedSet {
    std::vector<std::string> changed;   // sorted row keys
    std::size_t eligible = 0;           // mode rows with a defined cell at v
    std::size_t excluded_undefined = 0; // mode rows skipped for a missing cell
};

ChangedSet changed_conditions(const OrientationMatrix& matrix, const std::string& v,
                              const std::string& baseline_key, ChangeMode mode,
                              const MetricOptions& opts = {});

/// c(v', v): among conditions that changed v, the fraction that also changed
/// v'. Throws EmptySteeringSet when nothing steered v.
Rational change_rate(const OrientationMatrix& matrix, const std::string& v_prime,
                     const std::string& v, const std::string& baseline_key, ChangeMode mode,
                     const MetricOptions& opts = {});

/// Mean c(v', v) over the graph successors of v; absent when v has no
/// successors in the matrix or nothing steered v.
std::optional<Rational> expected_accuracy(const CausalGraph& graph, const OrientationMatrix& matrix,
                                          const std::string& v, const std::string& baseline_key,
                                          ChangeMode mode, const MetricOptions& opts = {});

/// Mean c(v', v) over the non-successors of v; same absence rules.
std::optional<Rational> unexpected_frequency(const CausalGraph& graph,
                                             const OrientationMatrix& matrix, const std::string& v,
                                             const std::string& baseline_key, ChangeMode mode,
                                             const MetricOptions& opts = {});

struct ValueMetrics {
    std::optional<Rational> expected_accuracy;
    std::optional<Rational> unexpected_frequency;
    std::size_t changed_count = 0; // |R≠(v)| or |F≠(v)|
    std::size_t successor_count = 0;
};

struct MetricReport {
    ChangeMode mode = ChangeMode::role;
    std::map<std::string, ValueMetrics> per_value;
    std::optional<Rational> macro_expected_accuracy;   // mean of defined per-value values
    std::optional<Rational> macro_unexpected_frequency;
    std::vector<std::string> values_without_expected;
    std::vector<std::string> values_without_unexpected;
};

/// Per-value metrics plus macro averages over the values where they are
/// defined. Throws NoDefinedMetrics when no value defines either metric.
MetricReport aggregate_report(const CausalGraph& graph, const OrientationMatrix& matrix,
                              const std::string& baseline_key, ChangeMode mode,
                              const MetricOptions& opts = {});

/// Stimulated / suppressed / maintained proportions for one value-feature
/// cell; the three components sum to exactly 1.
struct SteerCellStats {
    Rational p_stim{0};
    Rational p_supp{0};
    Rational p_maint{1};
};

/// Proportions over per-role (unsteered, steered) cell pairs.
SteerCellStats cell_stats(const std::vector<std::pair<ScoreCell, ScoreCell>>& per_role_pairs,
                          double epsilon = 0.0);

/// Cosine of the two proportion 3-vectors; in [0, 1].
double cell_cosine(const SteerCellStats& train, const SteerCellStats& test);

/// min(p_stim, p_supp); low values mean one-directional steering.
Rational noise_ratio(const SteerCellStats& stats);

/// Mean cell noise over all of a value's feature cells.
Rational value_noise(const std::vector<SteerCellStats>& cells);

/// Number of values whose cell differs from the baseline's (both defined).
std::size_t steered_count(const OrientationMatrix& matrix, const std::string& row_key,
                          const std::string& baseline_key, const MetricOptions& opts = {});

/// Mean steered_count over the conditions of the mode.
Rational mean_steered(const OrientationMatrix& matrix, ChangeMode mode,
                      const std::string& baseline_key, const MetricOptions& opts = {});

/// Among changed questions of one value-feature dyad, the fraction moving
/// against the majority direction; ties count as 1/2.
Rational within_value_inverse_ratio(const std::vector<int>& question_deltas);

struct PairedReport {
    MetricReport report_a;
    MetricReport report_b;
    /// value -> (expected_a - expected_b, unexpected_a - unexpected_b), where defined on both sides
    std::map<std::string, std::pair<std::optional<Rational>, std::optional<Rational>>> deltas;
};

/// aggregate_report for two graphs over the identical matrix.
PairedReport compare_graphs(const CausalGraph& graph_a, const CausalGraph& graph_b,
                            const OrientationMatrix& matrix, const std::string& baseline_key,
                            ChangeMode mode, const MetricOptions& opts = {});

// ---- Table-style per-feature steering summary ----

struct SteerTableCell {
    SteerCellStats train;
    std::size_t n_roles = 0;
    std::optional<SteerCellStats> test;
    std::optional<double> cosine; // train vs test proportions
};

struct SteerTable {
    std::vector<std::string> value_ids;    // columns
    std::vector<std::string> feature_keys; // rows, canonical "L<layer>:f<feature>x<strength>"
    std::map<std::string, std::map<std::string, SteerTableCell>> cells; // feature -> value -> cell
    std::map<std::string, std::optional<double>> mean_similarity;       // per feature
    std::map<std::string, std::optional<Rational>> noise_row;           // per value
};

/// Builds the per-(value, feature) steering table from matrices holding both
/// role rows and per-role feature rows. `test_matrix` may be null.
SteerTable build_steer_table(const OrientationMatrix& train_matrix,
                             const OrientationMatrix* test_matrix,
                             const MetricOptions& opts = {});

} // namespace valsteer
