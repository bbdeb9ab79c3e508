#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "valsteer/graph.hpp"
#include "valsteer/matrix.hpp"
#include "valsteer/rational.hpp"

namespace valsteer {

/// Linear-Gaussian structural causal model over value nodes. Rows are sampled
/// ancestrally, squashed with tanh and quantized to (sum, count) cells, so the
/// synthetic data has the same shape and type as scored questionnaire output.
struct ScmSpec {
    CausalGraph dag;
    std::map<std::pair<std::string, std::string>, double> edge_weights;
    double noise_scale = 0.4;
    double shift_scale = 0.6; // intervention shift magnitude, 1.5 x noise_scale
    int question_count = 20;
    double role_target_count = 14.0; // expected nodes hit by a role-like condition
    double sae_target_count = 4.0;   // expected nodes hit by a feature-like condition
    std::uint64_t seed = 0;

    void validate() const;
};

/// Random DAG over nodes "v01".."vNN": a seeded topological order with each
/// forward pair included with probability expected_degree / (n - 1).
CausalGraph random_dag(std::size_t n_nodes, double expected_degree, std::uint64_t seed);

/// Random DAG over the given node set with exactly `n_edges` edges; used as a
/// degree-matched reference graph.
CausalGraph random_dag_matching(const std::vector<std::string>& nodes, std::size_t n_edges,
                                std::uint64_t seed);

/// Random DAG plus seeded edge weights (magnitude in [0.5, 0.8], random sign).
ScmSpec make_world(std::size_t n_nodes, double expected_degree, std::uint64_t seed);

std::string serialize_scm(const ScmSpec& spec);
ScmSpec parse_scm(const std::string& json_text);

/// A steering condition together with its resolved shift targets.
struct SynthCondition {
    SteeringCondition condition;
    std::map<std::string, double> shifts;
};

SynthCondition baseline_condition(const ScmSpec& spec);
/// Role-like condition: many-node shift set, fixed per role index.
SynthCondition role_condition(const ScmSpec& spec, std::size_t role_index);
/// Feature-like condition on the baseline role: few-node shift set.
SynthCondition feature_condition(const ScmSpec& spec, std::size_t feature_index);
/// Feature applied on top of a role; shifts add.
SynthCondition compose(const ScmSpec& spec, const SynthCondition& role,
                       const SynthCondition& feature);

/// The discovery-data shape: every role (including the baseline) crossed with
/// every feature, n_roles x n_features rows. Rows sharing a role or feature
/// share that factor's shifts (and rows of one role share its noise).
std::vector<SynthCondition> cross_conditions(const ScmSpec& spec, std::size_t n_roles,
                                             std::size_t n_features);

/// Same n_roles x n_features row count, but every row draws fresh role and
/// feature shifts under a unique role identity, so rows are i.i.d. — the
/// shape the conditional-independence tests assume during discovery.
std::vector<SynthCondition> independent_cross_conditions(const ScmSpec& spec, std::size_t n_roles,
                                                         std::size_t n_features);

/// One matrix row per condition (xN when rows_per_condition > 1, with
/// distinguishable row keys). Deterministic under the spec seed regardless of
/// sampling order.
OrientationMatrix sample_dataset(const ScmSpec& spec, const std::vector<SynthCondition>& conditions,
                                 std::size_t rows_per_condition = 1);

/// Unquantized node means for one condition; test hook for the analytic
/// propagation checks.
std::map<std::string, double> sample_raw_row(const ScmSpec& spec, const SynthCondition& condition,
                                             std::uint64_t row_index);

struct RecoveryScore {
    std::optional<Rational> skeleton_precision; // absent when nothing was discovered
    std::optional<Rational> skeleton_recall;    // absent when the truth has no edges
    std::optional<Rational> skeleton_f1;
    /// Over common-skeleton edges that the true equivalence class directs:
    /// fraction directed the same way by the discovered graph.
    std::optional<Rational> orientation_accuracy;
};

RecoveryScore evaluate_recovery(const CausalGraph& truth_dag, const CausalGraph& discovered);

} // namespace valsteer
