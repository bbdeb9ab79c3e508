#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "valsteer/catalog.hpp"
#include "valsteer/condition.hpp"
#include "valsteer/split.hpp"
#include "valsteer/templates.hpp"

namespace valsteer {

struct EndpointConfig {
    std::string base_url;    // e.g. http://127.0.0.1:8080
    std::string model_name;
    std::string path = "/v1/chat/completions";
    std::string api_key_env; // empty = no auth required
    int timeout_s = 30;
    int max_retries = 2;
    int max_concurrency = 4;
    double backoff_base_s = 0.25; // doubled per retry

    void validate() const;
    std::string identity() const { return base_url + " model=" + model_name; }
};

/// Answers one questionnaire request and one judge request. The HTTP backend
/// speaks the common chat-completions wire shape; the stub backend is an
/// offline deterministic double.
class QuestionnaireBackend {
public:
    virtual ~QuestionnaireBackend() = default;
    /// Called once before any request (auth checks and the like).
    virtual void preflight() {}
    virtual std::string name() const = 0;
    /// Raw response text ("Thought: ... Answer: ..." by contract).
    virtual std::string complete(const SteeringCondition& condition, const QuestionItem& question,
                                 const RenderedPrompt& prompt) = 0;
    /// Raw reply to a judge prompt.
    virtual std::string judge(const std::string& judge_prompt) = 0;
};

/// Per-value yes/no/unsure weights for the stub's emulated steering.
struct StubProfile {
    struct Weights {
        double yes = 1.0;
        double no = 1.0;
        double unsure = 0.5;
    };
    Weights default_weights;
    std::map<std::string, Weights> per_value;

    const Weights& weights_for(const std::string& value_id) const;
};

/// Deterministic offline responder: the label comes from a stable hash of
/// (condition identity, question id, seed) weighted by the profile, the
/// phrasing from further hash bits. One yes phrasing ("For sure.") does not
/// match the local answer rules, so stub runs exercise judge escalation.
class StubResponder {
public:
    StubResponder(StubProfile profile, std::uint64_t seed)
        : profile_(std::move(profile)), seed_(seed) {}

    std::pair<std::string, std::string> respond(const SteeringCondition& condition,
                                                const QuestionItem& question) const;

private:
    StubProfile profile_;
    std::uint64_t seed_;
};

std::unique_ptr<QuestionnaireBackend> make_stub_backend(StubProfile profile, std::uint64_t seed);
std::unique_ptr<QuestionnaireBackend> make_http_backend(EndpointConfig config);
/// Separate judge endpoint, same questionnaire endpoint.
std::unique_ptr<QuestionnaireBackend> make_http_backend(EndpointConfig config,
                                                        EndpointConfig judge_config);

struct RunOptions {
    int max_retries = 2;
    int max_concurrency = 4;
    double backoff_base_s = 0.25;
    bool judge_thoughts = false; // also label the thought text via the judge
};

struct RunManifest {
    std::string catalog_hash;
    std::uint64_t split_seed = 0;
    std::vector<std::string> template_ids;
    std::vector<std::string> condition_keys;
    std::string endpoint;
    std::string started_at;
    std::string finished_at;
    std::size_t total_requests = 0;
    std::size_t total_retries = 0;
    std::size_t judge_calls = 0;
};

std::string serialize_manifest(const RunManifest& manifest);

/// Stable content hash of the catalog's canonical serialization.
std::string catalog_hash(const Catalog& catalog);

struct RunResult {
    std::vector<ResponseRecord> records; // canonical (condition key, question id) order
    RunManifest manifest;
};

/// Runs the questionnaire for every (condition, split-selected question) pair
/// with bounded concurrency, retries with exponential backoff, and judge
/// escalation for answers the local rules cannot classify. SAE conditions are
/// rejected: activation steering cannot be replayed through a chat endpoint,
/// ingest such response sets from files instead.
RunResult run_questionnaire(QuestionnaireBackend& backend, const Catalog& catalog,
                            const RoleSet& roles, const std::vector<SteeringCondition>& conditions,
                            const DatasetSplit& split, const PromptTemplate& tmpl,
                            const RunOptions& options = {});

} // namespace valsteer
