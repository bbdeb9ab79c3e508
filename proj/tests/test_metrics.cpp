#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oracle_metrics.hpp"
#include "valsteer/metrics.hpp"
#include "valsteer/synthlab.hpp"

using namespace valsteer;
using test::make_catalog;
using test::make_matrix;

namespace {

SteeringCondition role(const std::string& id) { return SteeringCondition::make_role(id); }
SteeringCondition sae(const std::string& role_id, long long f) {
    return SteeringCondition::make_sae(role_id, f, 12, 100.0);
}

} // namespace

TEST_CASE("changed_conditions compares exact rational means") {
    const Catalog catalog = make_catalog({{"v", 4}});
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"v", {0, 4}}}},
        {role("r001"), {{"v", {0, 8}}}},  // same mean as baseline
        {role("r002"), {{"v", {2, 4}}}},  // 0.5
        {role("r003"), {{"v", {-1, 4}}}}, // -0.25
    });
    const ChangedSet set = changed_conditions(m, "v", "role:r000", ChangeMode::role);
    CHECK(set.changed == std::vector<std::string>{"role:r002", "role:r003"});
    CHECK(set.eligible == 3);
}

TEST_CASE("equal-mean cells with different denominators do not count as changed") {
    const Catalog catalog = make_catalog({{"v", 8}});
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"v", {1, 4}}}},
        {role("r001"), {{"v", {2, 8}}}}, // 2/8 == 1/4
    });
    CHECK(changed_conditions(m, "v", "role:r000", ChangeMode::role).changed.empty());
}

TEST_CASE("change_rate of the steered value itself is one") {
    const Catalog catalog = make_catalog({{"v", 4}, {"w", 4}});
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"v", {0, 4}}, {"w", {0, 4}}}},
        {role("r001"), {{"v", {1, 4}}, {"w", {0, 4}}}},
        {role("r002"), {{"v", {2, 4}}, {"w", {1, 4}}}},
    });
    CHECK(change_rate(m, "v", "v", "role:r000", ChangeMode::role) == Rational(1));
    CHECK(change_rate(m, "w", "v", "role:r000", ChangeMode::role) == make_rational(1, 2));
}

TEST_CASE("the two-row hand-enumerated example gives c = 1/2") {
    // baseline (0,0); r1 = (1,0); r2 = (1,1) over (v, v')
    const Catalog catalog = make_catalog({{"v", 1}, {"w", 1}});
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"v", {0, 1}}, {"w", {0, 1}}}},
        {role("r001"), {{"v", {1, 1}}, {"w", {0, 1}}}},
        {role("r002"), {{"v", {1, 1}}, {"w", {1, 1}}}},
    });
    const ChangedSet set = changed_conditions(m, "v", "role:r000", ChangeMode::role);
    CHECK(set.changed.size() == 2);
    CHECK(change_rate(m, "w", "v", "role:r000", ChangeMode::role) == make_rational(1, 2));
}

TEST_CASE("an unsteered value raises EmptySteeringSet") {
    const Catalog catalog = make_catalog({{"v", 4}, {"w", 4}});
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"v", {0, 4}}, {"w", {0, 4}}}},
        {role("r001"), {{"v", {0, 4}}, {"w", {1, 4}}}},
    });
    CHECK_THROWS_AS(change_rate(m, "w", "v", "role:r000", ChangeMode::role), EmptySteeringSet);
}

TEST_CASE("sae mode draws only features applied to the baseline role by default") {
    const Catalog catalog = make_catalog({{"v", 4}});
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"v", {0, 4}}}},
        {role("r001"), {{"v", {3, 4}}}},
        {sae("r000", 7), {{"v", {1, 4}}}},
        {sae("r001", 7), {{"v", {2, 4}}}}, // feature on a non-baseline role
    });
    const ChangedSet strict = changed_conditions(m, "v", "role:r000", ChangeMode::sae);
    CHECK(strict.changed == std::vector<std::string>{sae("r000", 7).key()});
    MetricOptions any_role;
    any_role.sae_any_role = true;
    const ChangedSet loose = changed_conditions(m, "v", "role:r000", ChangeMode::sae, any_role);
    CHECK(loose.changed.size() == 2);
}

TEST_CASE("expected_accuracy handles single and empty successor sets") {
    const Catalog catalog = make_catalog({{"v", 4}, {"w", 4}});
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"v", {0, 4}}, {"w", {0, 4}}}},
        {role("r001"), {{"v", {1, 4}}, {"w", {0, 4}}}},
        {role("r002"), {{"v", {2, 4}}, {"w", {1, 4}}}},
    });
    CausalGraph g = CausalGraph::make(CausalGraph::Kind::dag, {"v", "w"});
    g.add_directed("v", "w");
    const auto acc = expected_accuracy(g, m, "v", "role:r000", ChangeMode::role);
    REQUIRE(acc.has_value());
    CHECK(*acc == make_rational(1, 2)); // single successor w with c = 1/2

    CHECK_FALSE(expected_accuracy(g, m, "w", "role:r000", ChangeMode::role).has_value());
    // w has a successor set {} -> absent; v's nonsuccessors are {} -> absent
    CHECK_FALSE(unexpected_frequency(g, m, "v", "role:r000", ChangeMode::role).has_value());
    CHECK_THROWS_AS(expected_accuracy(g, m, "ghost", "role:r000", ChangeMode::role), UnknownValue);
}

TEST_CASE("missing baseline raises MissingBaseline") {
    const Catalog catalog = make_catalog({{"v", 4}});
    const OrientationMatrix m = make_matrix(catalog, {{role("r001"), {{"v", {1, 4}}}}});
    CHECK_THROWS_AS(changed_conditions(m, "v", "role:r000", ChangeMode::role), MissingBaseline);
}

TEST_CASE("aggregate_report macro-averages defined metrics and lists the rest") {
    const Catalog catalog = make_catalog({{"a", 2}, {"b", 2}, {"c", 2}});
    // graph a -> b, c isolated
    CausalGraph g = CausalGraph::make(CausalGraph::Kind::dag, {"a", "b", "c"});
    g.add_directed("a", "b");
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"a", {0, 2}}, {"b", {0, 2}}, {"c", {0, 2}}}},
        {role("r001"), {{"a", {1, 2}}, {"b", {1, 2}}, {"c", {0, 2}}}},
        {role("r002"), {{"a", {2, 2}}, {"b", {0, 2}}, {"c", {1, 2}}}},
        {role("r003"), {{"a", {0, 2}}, {"b", {2, 2}}, {"c", {2, 2}}}},
    });
    const MetricReport report = aggregate_report(g, m, "role:r000", ChangeMode::role);
    // a steered by r1, r2; b changed for r1 only -> expected accuracy 1/2
    CHECK(report.per_value.at("a").expected_accuracy == make_rational(1, 2));
    CHECK(report.per_value.at("a").changed_count == 2);
    // b and c have no successors
    CHECK_FALSE(report.per_value.at("b").expected_accuracy.has_value());
    CHECK(report.values_without_expected == std::vector<std::string>{"b", "c"});
    REQUIRE(report.macro_expected_accuracy.has_value());
    CHECK(*report.macro_expected_accuracy == make_rational(1, 2));
    REQUIRE(report.macro_unexpected_frequency.has_value());
    // a: nonsuc {c}: c changed for r1? no (0,2)==(0,2); r2 yes -> 1/2
    // b: nonsuc {a, c}: steered by r1, r3; a: r1 yes, r3 no -> 1/2; c: r1 no, r3 yes -> 1/2 -> 1/2
    // c: nonsuc {a, b}: steered by r2, r3; a: r2 yes r3 no -> 1/2; b: r2 no r3 yes -> 1/2 -> 1/2
    CHECK(*report.macro_unexpected_frequency == make_rational(1, 2));
}

TEST_CASE("macro averages of two values match the arithmetic mean") {
    const Catalog catalog = make_catalog({{"a", 2}, {"b", 2}, {"c", 2}});
    CausalGraph g = CausalGraph::make(CausalGraph::Kind::dag, {"a", "b", "c"});
    g.add_directed("a", "b");
    g.add_directed("c", "b");
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"a", {0, 2}}, {"b", {0, 2}}, {"c", {0, 2}}}},
        {role("r001"), {{"a", {1, 2}}, {"b", {1, 2}}, {"c", {1, 2}}}},
        {role("r002"), {{"a", {2, 2}}, {"b", {0, 2}}, {"c", {0, 2}}}},
    });
    const MetricReport report = aggregate_report(g, m, "role:r000", ChangeMode::role);
    // a: successors {b}: c = 1/2; c: successors {b}: steered only by r1 -> 1
    CHECK(*report.macro_expected_accuracy == make_rational(3, 4));
}

TEST_CASE("aggregate_report equals the naive-loop oracle on random fixtures") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n_values = 3 + rng() % 4;   // 3..6
        const std::size_t n_roles = 2 + rng() % 5;    // 2..6 role rows
        const std::size_t n_features = 1 + rng() % 4; // 1..4 features on baseline

        std::vector<std::pair<std::string, int>> shape;
        for (std::size_t v = 0; v < n_values; ++v)
            shape.emplace_back("n" + std::to_string(v), 1);
        const Catalog catalog = make_catalog(shape);

        test::oracle::Fixture fixture;
        for (const auto& [vid, unused] : shape) fixture.values.push_back(vid);

        const CausalGraph dag = random_dag(n_values, 2.0, 5000 + trial);
        // rename dag nodes onto the fixture's values (both sorted ascending)
        std::map<std::string, std::string> rename;
        for (std::size_t i = 0; i < n_values; ++i) rename[dag.nodes[i]] = fixture.values[i];
        CausalGraph g = CausalGraph::make(CausalGraph::Kind::dag, fixture.values);
        for (const auto& [f, t] : dag.directed_edges) {
            g.add_directed(rename[f], rename[t]);
            fixture.edges.emplace_back(rename[f], rename[t]);
        }

        std::vector<std::pair<SteeringCondition, std::vector<std::pair<std::string, ScoreCell>>>>
            rows;
        auto add_row = [&](const SteeringCondition& cond, bool is_role, bool is_feature) {
            std::vector<std::pair<std::string, ScoreCell>> cells;
            test::oracle::Row orow;
            orow.key = cond.key();
            orow.is_role = is_role;
            orow.is_feature_on_baseline = is_feature;
            for (const auto& vid : fixture.values) {
                const long long count = 1 + static_cast<long long>(rng() % 6);
                const long long sum =
                    static_cast<long long>(rng() % (2 * count + 1)) - count;
                cells.emplace_back(vid, ScoreCell{sum, count});
                orow.cells[vid] = static_cast<double>(sum) / static_cast<double>(count);
            }
            rows.emplace_back(cond, std::move(cells));
            fixture.rows.push_back(std::move(orow));
        };

        add_row(role("r000"), true, false);
        fixture.baseline_key = "role:r000";
        for (std::size_t r = 1; r <= n_roles; ++r)
            add_row(role("r" + std::to_string(r)), true, false);
        for (std::size_t f = 0; f < n_features; ++f)
            add_row(sae("r000", static_cast<long long>(f)), false, true);

        const OrientationMatrix m = make_matrix(catalog, rows);
        for (const ChangeMode mode : {ChangeMode::role, ChangeMode::sae}) {
            const bool sae_mode = mode == ChangeMode::sae;
            MetricReport report;
            bool lib_threw = false;
            try {
                report = aggregate_report(g, m, "role:r000", mode);
            } catch (const NoDefinedMetrics&) {
                lib_threw = true;
            }
            const auto macro = test::oracle::macro(fixture, sae_mode);
            if (lib_threw) {
                CHECK_FALSE(macro.expected.has_value());
                CHECK_FALSE(macro.unexpected.has_value());
                continue;
            }
            for (const auto& vid : fixture.values) {
                const auto& metrics = report.per_value.at(vid);
                const auto expected = test::oracle::expected_accuracy(fixture, vid, sae_mode);
                const auto unexpected = test::oracle::unexpected_frequency(fixture, vid, sae_mode);
                REQUIRE(metrics.expected_accuracy.has_value() == expected.has_value());
                REQUIRE(metrics.unexpected_frequency.has_value() == unexpected.has_value());
                if (expected)
                    CHECK(to_double(*metrics.expected_accuracy) ==
                          doctest::Approx(*expected).epsilon(1e-12));
                if (unexpected)
                    CHECK(to_double(*metrics.unexpected_frequency) ==
                          doctest::Approx(*unexpected).epsilon(1e-12));
            }
            REQUIRE(report.macro_expected_accuracy.has_value() == macro.expected.has_value());
            if (macro.expected)
                CHECK(to_double(*report.macro_expected_accuracy) ==
                      doctest::Approx(*macro.expected).epsilon(1e-12));
            REQUIRE(report.macro_unexpected_frequency.has_value() == macro.unexpected.has_value());
            if (macro.unexpected)
                CHECK(to_double(*report.macro_unexpected_frequency) ==
                      doctest::Approx(*macro.unexpected).epsilon(1e-12));
        }
    }
}

TEST_CASE("cell_stats counts delta signs and sums to one exactly") {
    // deltas +, +, -, 0
    std::vector<std::pair<ScoreCell, ScoreCell>> pairs = {
        {{0, 4}, {1, 4}}, {{1, 4}, {2, 4}}, {{2, 4}, {1, 4}}, {{1, 4}, {2, 8}}};
    const SteerCellStats stats = cell_stats(pairs);
    CHECK(stats.p_stim == make_rational(1, 2));
    CHECK(stats.p_supp == make_rational(1, 4));
    CHECK(stats.p_maint == make_rational(1, 4));
    CHECK(stats.p_stim + stats.p_supp + stats.p_maint == Rational(1));

    const SteerCellStats none = cell_stats({{{1, 4}, {1, 4}}, {{0, 4}, {0, 8}}});
    CHECK(none.p_maint == Rational(1));
    CHECK_THROWS_AS(cell_stats({}), EmptyInput);
}

TEST_CASE("cell_cosine spans [0, 1] with the documented anchor points") {
    SteerCellStats a{Rational(1), Rational(0), Rational(0)};
    SteerCellStats b{Rational(0), Rational(1), Rational(0)};
    CHECK(cell_cosine(a, a) == doctest::Approx(1.0));
    CHECK(cell_cosine(a, b) == doctest::Approx(0.0));

    SteerCellStats c{make_rational(1, 2), make_rational(1, 4), make_rational(1, 4)};
    SteerCellStats d{make_rational(1, 4), make_rational(1, 2), make_rational(1, 4)};
    // direct formula: (1/8 + 1/8 + 1/16) / (3/8) = 5/6
    CHECK(cell_cosine(c, d) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(cell_cosine(c, d) == doctest::Approx(cell_cosine(d, c)));
}

TEST_CASE("noise ratio is the smaller steering proportion, at most one half") {
    SteerCellStats s{make_rational(3, 10), make_rational(1, 10), make_rational(6, 10)};
    CHECK(noise_ratio(s) == make_rational(1, 10));
    SteerCellStats onesided{make_rational(4, 10), Rational(0), make_rational(6, 10)};
    CHECK(noise_ratio(onesided) == Rational(0));
    CHECK(value_noise({s, onesided}) == make_rational(1, 20));
    CHECK_THROWS_AS(value_noise({}), EmptyInput);

    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const long long n = 1 + rng() % 20;
        const long long stim = rng() % (n + 1);
        const long long supp = rng() % (n - stim + 1);
        SteerCellStats random_stats{make_rational(stim, n), make_rational(supp, n),
                                    make_rational(n - stim - supp, n)};
        CHECK(noise_ratio(random_stats) <= make_rational(1, 2));
    }
}

TEST_CASE("steered_count and mean_steered tally differing cells") {
    const Catalog catalog = make_catalog({{"a", 2}, {"b", 2}, {"c", 2}});
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"a", {0, 2}}, {"b", {0, 2}}, {"c", {0, 2}}}},
        {role("r001"), {{"a", {1, 2}}, {"b", {2, 2}}, {"c", {-1, 2}}}}, // 3 differ
        {role("r002"), {{"a", {0, 2}}, {"b", {0, 2}}, {"c", {0, 2}}}},  // 0 differ
        {sae("r000", 1), {{"a", {1, 2}}, {"b", {0, 2}}, {"c", {0, 2}}}},
    });
    CHECK(steered_count(m, "role:r001", "role:r000") == 3);
    CHECK(steered_count(m, "role:r002", "role:r000") == 0);
    CHECK(mean_steered(m, ChangeMode::role, "role:r000") == make_rational(3, 2));
    CHECK(mean_steered(m, ChangeMode::sae, "role:r000") == Rational(1));
}

TEST_CASE("within-value inverse ratio follows the majority convention") {
    CHECK(within_value_inverse_ratio({1, 1, 1, 1, -1}) == make_rational(1, 5));
    CHECK(within_value_inverse_ratio({1, 1, 0, 1}) == Rational(0));
    CHECK(within_value_inverse_ratio({1, -1}) == make_rational(1, 2));
    CHECK(within_value_inverse_ratio({-1, -1, 1, 0, 0}) == make_rational(1, 3));
    CHECK_THROWS_AS(within_value_inverse_ratio({0, 0}), NoChanges);
}

TEST_CASE("compare_graphs is reflexive and handles empty references") {
    const Catalog catalog = make_catalog({{"a", 2}, {"b", 2}});
    CausalGraph g = CausalGraph::make(CausalGraph::Kind::dag, {"a", "b"});
    g.add_directed("a", "b");
    const CausalGraph empty = CausalGraph::make(CausalGraph::Kind::dag, {"a", "b"});
    const OrientationMatrix m = make_matrix(catalog, {
        {role("r000"), {{"a", {0, 2}}, {"b", {0, 2}}}},
        {role("r001"), {{"a", {1, 2}}, {"b", {1, 2}}}},
        {role("r002"), {{"a", {2, 2}}, {"b", {0, 2}}}},
    });
    const PairedReport same = compare_graphs(g, g, m, "role:r000", ChangeMode::role);
    for (const auto& [v, d] : same.deltas) {
        if (d.first) CHECK(*d.first == Rational(0));
        if (d.second) CHECK(*d.second == Rational(0));
    }

    const PairedReport vs_empty = compare_graphs(g, empty, m, "role:r000", ChangeMode::role);
    CHECK_FALSE(vs_empty.report_b.macro_expected_accuracy.has_value());
    CHECK(vs_empty.report_b.macro_unexpected_frequency.has_value());
}

TEST_CASE("build_steer_table assembles per-dyad stats with noise row") {
    const Catalog catalog = make_catalog({{"a", 2}, {"b", 2}});
    const OrientationMatrix train = make_matrix(catalog, {
        {role("r000"), {{"a", {0, 2}}, {"b", {0, 2}}}},
        {role("r001"), {{"a", {1, 2}}, {"b", {0, 2}}}},
        {sae("r000", 9), {{"a", {1, 2}}, {"b", {0, 2}}}}, // stim a, maintain b
        {sae("r001", 9), {{"a", {0, 2}}, {"b", {-1, 2}}}}, // supp a, supp b
    });
    const SteerTable table = build_steer_table(train, &train);
    REQUIRE(table.feature_keys.size() == 1);
    const auto& cell_a = table.cells.at(table.feature_keys[0]).at("a");
    CHECK(cell_a.n_roles == 2);
    CHECK(cell_a.train.p_stim == make_rational(1, 2));
    CHECK(cell_a.train.p_supp == make_rational(1, 2));
    REQUIRE(cell_a.cosine.has_value());
    CHECK(*cell_a.cosine == doctest::Approx(1.0)); // train compared against itself
    REQUIRE(table.noise_row.at("a").has_value());
    CHECK(*table.noise_row.at("a") == make_rational(1, 2));
    CHECK(*table.noise_row.at("b") == Rational(0));
}
