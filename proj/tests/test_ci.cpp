#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "valsteer/ci_test.hpp"

using namespace valsteer;

namespace {

/// Matrix with one row per sample; doubles are embedded as (sum, 10^6) cells.
OrientationMatrix matrix_from_columns(const std::vector<std::string>& names,
                                      const std::vector<std::vector<double>>& columns) {
    std::vector<std::pair<std::string, int>> shape;
    for (const auto& n : names) shape.emplace_back(n, 1);
    const Catalog catalog = test::make_catalog(shape);

    std::vector<std::pair<SteeringCondition, OrientationVector>> rows;
    const std::size_t n = columns.front().size();
    for (std::size_t r = 0; r < n; ++r) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "s%05zu", r);
        OrientationVector vec;
        for (std::size_t c = 0; c < names.size(); ++c) {
            ScoreCell cell;
            cell.count = 1000000;
            cell.sum = std::llround(std::clamp(columns[c][r], -1.0, 1.0) * 1e6);
            vec[names[c]] = cell;
        }
        rows.emplace_back(SteeringCondition::make_role(buf), std::move(vec));
    }
    return matrix_from_vectors(catalog, rows);
}

std::vector<double> gaussian_column(std::mt19937_64& rng, std::size_t n, double scale) {
    std::normal_distribution<double> dist(0.0, scale);
    std::vector<double> out(n);
    for (auto& x : out) x = std::tanh(dist(rng));
    return out;
}

} // namespace

TEST_CASE("an exact copy of a column is never independent") {
    std::mt19937_64 rng(1);
    auto a = gaussian_column(rng, 200, 0.5);
    const OrientationMatrix m = matrix_from_columns({"a", "b"}, {a, a});
    const CiResult res = ci_test_fisher_z(m, "a", "b", {}, 0.05);
    CHECK_FALSE(res.independent);
    CHECK(res.p_value < 1e-10);
}

TEST_CASE("a constant column raises DegenerateVariance") {
    std::mt19937_64 rng(2);
    auto a = gaussian_column(rng, 50, 0.5);
    std::vector<double> flat(50, 0.25);
    const OrientationMatrix m = matrix_from_columns({"a", "b"}, {a, flat});
    CHECK_THROWS_AS(ci_test_fisher_z(m, "a", "b", {}, 0.05), DegenerateVariance);
}

TEST_CASE("fisher-z acceptance rate on independent noise is near the nominal level") {
    int accepted = 0;
    const int trials = 200;
    for (int seed = 0; seed < trials; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 7919 + 13);
        auto a = gaussian_column(rng, 1000, 0.5);
        auto b = gaussian_column(rng, 1000, 0.5);
        const OrientationMatrix m = matrix_from_columns({"a", "b"}, {a, b});
        if (ci_test_fisher_z(m, "a", "b", {}, 0.05).independent) ++accepted;
    }
    CHECK(accepted >= 184); // >= 92% of 200
}

TEST_CASE("partial correlation vanishes given the common cause") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.3);
    const std::size_t n = 2000;
    std::vector<double> z(n), x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = noise(rng) * 2.0;
        z[i] = std::tanh(zi);
        x[i] = std::tanh(0.8 * zi + noise(rng));
        y[i] = std::tanh(0.8 * zi + noise(rng));
    }
    const OrientationMatrix m = matrix_from_columns({"x", "y", "z"}, {x, y, z});
    CHECK_FALSE(ci_test_fisher_z(m, "x", "y", {}, 0.05).independent);
    CHECK(ci_test_fisher_z(m, "x", "y", {"z"}, 0.05).independent);
}

TEST_CASE("ci tests are symmetric in their arguments") {
    std::mt19937_64 rng(4);
    auto a = gaussian_column(rng, 120, 0.5);
    auto b = gaussian_column(rng, 120, 0.5);
    auto c = gaussian_column(rng, 120, 0.5);
    const OrientationMatrix m = matrix_from_columns({"a", "b", "c"}, {a, b, c});
    const CiResult ab = ci_test_fisher_z(m, "a", "b", {"c"}, 0.05);
    const CiResult ba = ci_test_fisher_z(m, "b", "a", {"c"}, 0.05);
    CHECK(ab.independent == ba.independent);
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
}

TEST_CASE("permutation test enforces its preconditions") {
    std::mt19937_64 rng(5);
    auto a = gaussian_column(rng, 40, 0.5);
    auto b = gaussian_column(rng, 40, 0.5);
    const OrientationMatrix m = matrix_from_columns({"a", "b"}, {a, b});
    CHECK_THROWS_AS(ci_test_permutation(m, "a", "b", {}, 0.05, 50), InvalidParameter);
    CHECK_THROWS_AS(ci_test_fisher_z(m, "a", "a", {}, 0.05), InvalidParameter);
    CHECK_THROWS_AS(ci_test_fisher_z(m, "a", "b", {"a"}, 0.05), InvalidParameter);
    CHECK_THROWS_AS(ci_test_fisher_z(m, "a", "b", {}, 1.5), InvalidParameter);
}

TEST_CASE("permutation test rejects identical columns and matches fisher-z on clear cases") {
    std::mt19937_64 rng(6);
    auto a = gaussian_column(rng, 40, 0.5);
    const OrientationMatrix dup = matrix_from_columns({"a", "b"}, {a, a});
    CHECK_FALSE(ci_test_permutation(dup, "a", "b", {}, 0.05, 200).independent);

    int agree = 0;
    const int trials = 60;
    for (int seed = 0; seed < trials; ++seed) {
        std::mt19937_64 r2(static_cast<std::uint64_t>(seed) * 31 + 5);
        std::normal_distribution<double> noise(0.0, 0.4);
        const bool dependent = seed % 2 == 0;
        std::vector<double> x(40), y(40), z(40);
        for (int i = 0; i < 40; ++i) {
            const double xi = noise(r2);
            x[i] = std::tanh(xi);
            z[i] = std::tanh(noise(r2));
            y[i] = std::tanh(dependent ? 0.9 * xi + 0.3 * noise(r2) : noise(r2));
        }
        const OrientationMatrix m = matrix_from_columns({"x", "y", "z"}, {x, y, z});
        const std::vector<std::string> cond = (seed % 3 == 0) ? std::vector<std::string>{"z"}
                                                              : std::vector<std::string>{};
        const bool f = ci_test_fisher_z(m, "x", "y", cond, 0.05).independent;
        const bool p = ci_test_permutation(m, "x", "y", cond, 0.05, 400, 99).independent;
        if (f == p) ++agree;
    }
    CHECK(agree >= 54); // >= 90%
}

TEST_CASE("too few complete rows raise InsufficientSamples") {
    const Catalog catalog = test::make_catalog({{"a", 1}, {"b", 1}, {"c", 1}});
    std::vector<std::pair<SteeringCondition, OrientationVector>> rows;
    for (int r = 0; r < 6; ++r) {
        OrientationVector vec;
        vec["a"] = ScoreCell{r % 3 - 1, 2};
        vec["b"] = ScoreCell{(r * 7) % 5 - 2, 3};
        if (r < 3) vec["c"] = ScoreCell{1, 2}; // only 3 complete rows for cond {c}
        rows.emplace_back(SteeringCondition::make_role("r" + std::to_string(r)), vec);
    }
    const OrientationMatrix m = matrix_from_vectors(catalog, rows);
    CHECK_THROWS_AS(ci_test_fisher_z(m, "a", "b", {"c"}, 0.05), InsufficientSamples);
}
