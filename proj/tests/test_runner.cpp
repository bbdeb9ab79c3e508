#include <doctest.h>

#include <cstdlib>

#include "fixture_server.hpp"
#include "helpers.hpp"
#include "valsteer/runner.hpp"
#include "valsteer/scoring.hpp"

using namespace valsteer;
using test::FixtureServer;
using test::make_catalog;
using test::make_roles;

namespace {

struct Setup {
    Catalog catalog = make_catalog({{"a", 5}, {"b", 5}});
    RoleSet roles = make_roles(3);
    DatasetSplit split;
    PromptTemplate tmpl = default_template();

    Setup() { split = split_dataset(catalog, roles, 4); }

    std::vector<SteeringCondition> two_conditions() const {
        return {SteeringCondition::make_role("r000"), SteeringCondition::make_role("r001")};
    }
};

} // namespace

TEST_CASE("stub responder is deterministic and seed-sensitive") {
    const Setup s;
    const StubResponder responder(StubProfile{}, 42);
    const auto cond = SteeringCondition::make_role("r001");
    const auto& q = s.catalog.question("a:q1");
    CHECK(responder.respond(cond, q) == responder.respond(cond, q));

    const StubResponder other(StubProfile{}, 43);
    int differing = 0;
    for (int i = 0; i < 1000; ++i) {
        QuestionItem fake;
        fake.id = "a:q" + std::to_string(i);
        fake.value_id = "a";
        if (responder.respond(cond, fake) != other.respond(cond, fake)) ++differing;
    }
    CHECK(differing > 200); // seed change must move a solid share of outputs
}

TEST_CASE("an all-yes stub profile produces only yes labels") {
    const Setup s;
    StubProfile profile;
    profile.default_weights = {1.0, 0.0, 0.0};
    auto backend = make_stub_backend(profile, 7);
    const RunResult run = run_questionnaire(*backend, s.catalog, s.roles, s.two_conditions(),
                                            s.split, s.tmpl);
    CHECK_FALSE(run.records.empty());
    for (const auto& r : run.records) {
        REQUIRE(r.label.has_value());
        CHECK(*r.label == TernaryLabel::yes);
    }
}

TEST_CASE("stub runs are reproducible and ordered canonically") {
    const Setup s;
    auto backend1 = make_stub_backend(StubProfile{}, 11);
    auto backend2 = make_stub_backend(StubProfile{}, 11);
    RunOptions serial;
    serial.max_concurrency = 1;
    RunOptions parallel;
    parallel.max_concurrency = 8;
    const RunResult a = run_questionnaire(*backend1, s.catalog, s.roles, s.two_conditions(),
                                          s.split, s.tmpl, serial);
    const RunResult b = run_questionnaire(*backend2, s.catalog, s.roles, s.two_conditions(),
                                          s.split, s.tmpl, parallel);
    CHECK(serialize_responses(a.records) == serialize_responses(b.records));

    // order is (condition key, question id), ascending
    for (std::size_t i = 1; i < a.records.size(); ++i) {
        const auto prev = std::make_pair(a.records[i - 1].condition.key(),
                                         a.records[i - 1].question_id);
        const auto cur = std::make_pair(a.records[i].condition.key(), a.records[i].question_id);
        CHECK(prev < cur);
    }

    // every record is labeled; escalated "For sure." answers resolve to yes
    for (const auto& r : a.records) {
        REQUIRE(r.label.has_value());
        if (r.answer == "For sure.") CHECK(*r.label == TernaryLabel::yes);
    }
    CHECK(a.manifest.total_requests == a.records.size() + a.manifest.judge_calls);
}

TEST_CASE("two conditions and a trimmed catalog give one record per dyad question") {
    Setup s;
    auto backend = make_stub_backend(StubProfile{}, 3);
    const RunResult run = run_questionnaire(*backend, s.catalog, s.roles, s.two_conditions(),
                                            s.split, s.tmpl);
    std::size_t expected = 0;
    for (const auto& cond : s.two_conditions())
        for (const auto& v : s.catalog.values())
            expected += s.split.question_filter(cond, v.id).size();
    CHECK(run.records.size() == expected);
    CHECK(run.manifest.condition_keys == std::vector<std::string>{"role:r000", "role:r001"});
    CHECK(run.manifest.catalog_hash == catalog_hash(s.catalog));
}

TEST_CASE("SAE conditions are rejected with guidance") {
    const Setup s;
    auto backend = make_stub_backend(StubProfile{}, 3);
    const std::vector<SteeringCondition> conds = {
        SteeringCondition::make_sae("r001", 1025, 12, 100.0)};
    CHECK_THROWS_AS(
        run_questionnaire(*backend, s.catalog, s.roles, conds, s.split, s.tmpl),
        UnsupportedCondition);
}

TEST_CASE("transient endpoint failures are retried to completion") {
    const Setup s;
    FixtureServer server(2); // two 429s per request, then success
    EndpointConfig config;
    config.base_url = server.url();
    config.model_name = "fixture";
    auto backend = make_http_backend(config);
    RunOptions options;
    options.max_retries = 2;
    options.backoff_base_s = 0.001;
    options.max_concurrency = 4;
    const RunResult run = run_questionnaire(*backend, s.catalog, s.roles, s.two_conditions(),
                                            s.split, s.tmpl, options);
    CHECK_FALSE(run.records.empty());
    for (const auto& r : run.records) {
        CHECK(r.thought == "the fixture always agrees.");
        CHECK(r.answer == "yes");
        CHECK(*r.label == TernaryLabel::yes);
    }
    CHECK(run.manifest.total_retries == 2 * run.records.size());
    CHECK(run.manifest.total_requests == 3 * run.records.size());
    CHECK(static_cast<std::size_t>(server.request_count()) == run.manifest.total_requests);
}

TEST_CASE("retry budget exhaustion surfaces EndpointError") {
    const Setup s;
    FixtureServer server(5);
    EndpointConfig config;
    config.base_url = server.url();
    config.model_name = "fixture";
    auto backend = make_http_backend(config);
    RunOptions options;
    options.max_retries = 1;
    options.backoff_base_s = 0.001;
    CHECK_THROWS_AS(run_questionnaire(*backend, s.catalog, s.roles, s.two_conditions(), s.split,
                                      s.tmpl, options),
                    EndpointError);
}

TEST_CASE("a missing API key fails before any request is sent") {
    const Setup s;
    FixtureServer server(0);
    EndpointConfig config;
    config.base_url = server.url();
    config.model_name = "fixture";
    config.api_key_env = "VALSTEER_TEST_KEY_THAT_IS_UNSET";
    unsetenv(config.api_key_env.c_str());
    auto backend = make_http_backend(config);
    CHECK_THROWS_AS(
        run_questionnaire(*backend, s.catalog, s.roles, s.two_conditions(), s.split, s.tmpl),
        AuthError);
    CHECK(server.request_count() == 0);

    // with the key present the same run succeeds and sends the bearer token
    setenv(config.api_key_env.c_str(), "sekrit", 1);
    server.require_bearer("sekrit");
    auto authed = make_http_backend(config);
    RunOptions options;
    options.backoff_base_s = 0.001;
    const RunResult run = run_questionnaire(*authed, s.catalog, s.roles, s.two_conditions(),
                                            s.split, s.tmpl, options);
    CHECK_FALSE(run.records.empty());
    unsetenv(config.api_key_env.c_str());
}

TEST_CASE("non-conforming judge replies raise JudgeFormatError") {
    const Setup s;
    // the fixture replies "It depends." to everything, so the local rules
    // escalate and the judge then violates the strict contract
    FixtureServer server(0, "Thought: hmm. Answer: It depends entirely.");
    EndpointConfig config;
    config.base_url = server.url();
    config.model_name = "fixture";
    auto backend = make_http_backend(config);
    RunOptions options;
    options.backoff_base_s = 0.001;
    CHECK_THROWS_AS(run_questionnaire(*backend, s.catalog, s.roles, s.two_conditions(), s.split,
                                      s.tmpl, options),
                    JudgeFormatError);
}

TEST_CASE("manifests serialize with their run statistics") {
    const Setup s;
    auto backend = make_stub_backend(StubProfile{}, 4);
    const RunResult run = run_questionnaire(*backend, s.catalog, s.roles, s.two_conditions(),
                                            s.split, s.tmpl);
    const std::string text = serialize_manifest(run.manifest);
    CHECK(text.find("\"catalog_hash\"") != std::string::npos);
    CHECK(text.find("\"endpoint\": \"stub\"") != std::string::npos);
    CHECK(text.find("\"split_seed\": 4") != std::string::npos);
}
