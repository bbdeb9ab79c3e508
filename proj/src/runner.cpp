#include "valsteer/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iterator>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "valsteer/detail/rng.hpp"
#include "valsteer/scoring.hpp"

namespace valsteer {

using nlohmann::json;

void EndpointConfig::validate() const {
    if (base_url.empty()) throw InvalidParameter("endpoint base_url is empty");
    if (max_concurrency < 1) throw InvalidParameter("max_concurrency must be >= 1");
    if (max_retries < 0) throw InvalidParameter("max_retries must be >= 0");
}

const StubProfile::Weights& StubProfile::weights_for(const std::string& value_id) const {
    auto it = per_value.find(value_id);
    return it == per_value.end() ? default_weights : it->second;
}

namespace {

struct Phrasing {
    const char* thought;
    const char* answer;
};

constexpr Phrasing kYesPhrasings[] = {
    {"This matches how I usually think and act.", "Yes."},
    {"I recognize myself in this and would embrace it.", "Yes, I would say so."},
    {"It fits my priorities well.", "Sure, that sounds like me."},
    {"I feel strongly aligned with this.", "For sure."},
};
constexpr Phrasing kNoPhrasings[] = {
    {"This runs against what I care about.", "No."},
    {"I would act differently in that situation.", "No, that is not like me."},
    {"It conflicts with my priorities.", "No, I would avoid that."},
};
constexpr Phrasing kUnsurePhrasings[] = {
    {"Both sides carry weight for me.", "Unsure."},
    {"The answer depends heavily on the situation.", "Unsure; it depends on the context."},
    {"I lack a settled view on this.", "I cannot give a definite answer."},
};

} // namespace

std::pair<std::string, std::string> StubResponder::respond(const SteeringCondition& condition,
                                                           const QuestionItem& question) const {
    const std::uint64_t h =
        detail::mix_seed(seed_, condition.key(), question.id);
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    const auto& w = profile_.weights_for(question.value_id);
    const double total = w.yes + w.no + w.unsure;
    if (!(total > 0)) throw InvalidParameter("stub profile weights must sum to > 0");

    const std::uint64_t variant = detail::splitmix(h);
    const Phrasing* pick = nullptr;
    if (u * total < w.yes) {
        pick = &kYesPhrasings[variant % std::size(kYesPhrasings)];
    } else if (u * total < w.yes + w.no) {
        pick = &kNoPhrasings[variant % std::size(kNoPhrasings)];
    } else {
        pick = &kUnsurePhrasings[variant % std::size(kUnsurePhrasings)];
    }
    return {pick->thought, pick->answer};
}

namespace {

class StubBackend final : public QuestionnaireBackend {
public:
    StubBackend(StubProfile profile, std::uint64_t seed) : responder_(std::move(profile), seed) {}

    std::string name() const override { return "stub"; }

    std::string complete(const SteeringCondition& condition, const QuestionItem& question,
                         const RenderedPrompt&) override {
        auto [thought, answer] = responder_.respond(condition, question);
        return "Thought: " + thought + " Answer: " + answer;
    }

    std::string judge(const std::string& judge_prompt) override {
        // pull the judgment text back out of the prompt
        const std::string open = "Judgment: \"";
        const std::size_t pos = judge_prompt.rfind(open);
        if (pos == std::string::npos) throw JudgeFormatError("stub judge got a malformed prompt");
        const std::size_t start = pos + open.size();
        const std::size_t end = judge_prompt.rfind("\"\nOutput:");
        if (end == std::string::npos || end < start)
            throw JudgeFormatError("stub judge got a malformed prompt");
        std::string text = judge_prompt.substr(start, end - start);
        for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        while (!text.empty() && (std::isspace(static_cast<unsigned char>(text.back())) ||
                                 std::ispunct(static_cast<unsigned char>(text.back()))))
            text.pop_back();

        // fixture rulings for judgment phrasings the local prefix rules miss
        static const std::map<std::string, std::string> rulings = {
            {"for sure", "yes"},
            {"the answer is no", "no"},
            {"i cannot provide a response based on personal opinions", "unsure"},
        };
        auto ruling = rulings.find(text);
        if (ruling != rulings.end()) return ruling->second;
        if (auto local = classify_answer(text)) return to_string(*local);
        return "unsure";
    }

private:
    StubResponder responder_;
};

class HttpBackend final : public QuestionnaireBackend {
public:
    explicit HttpBackend(EndpointConfig config) : config_(std::move(config)), judge_config_(config_) {}
    HttpBackend(EndpointConfig config, EndpointConfig judge_config)
        : config_(std::move(config)), judge_config_(std::move(judge_config)) {}

    std::string name() const override { return config_.identity(); }

    void preflight() override {
        config_.validate();
        judge_config_.validate();
        resolve_key(config_);
        resolve_key(judge_config_);
    }

    std::string complete(const SteeringCondition&, const QuestionItem&,
                         const RenderedPrompt& prompt) override {
        return request(config_, prompt.system_block, prompt.user_block);
    }

    std::string judge(const std::string& judge_prompt) override {
        return request(judge_config_, "", judge_prompt);
    }

private:
    static std::string resolve_key(const EndpointConfig& config) {
        if (config.api_key_env.empty()) return "";
        const char* key = std::getenv(config.api_key_env.c_str());
        if (!key || !*key)
            throw AuthError("environment variable '" + config.api_key_env + "' is not set");
        return key;
    }

    std::string request(const EndpointConfig& config, const std::string& system_block,
                        const std::string& user_block) {
        json messages = json::array();
        if (!system_block.empty()) messages.push_back({{"role", "system"}, {"content", system_block}});
        messages.push_back({{"role", "user"}, {"content", user_block}});
        const std::string body =
            json{{"model", config.model_name}, {"messages", std::move(messages)}, {"temperature", 0}}
                .dump();

        httplib::Client client(config.base_url);
        client.set_connection_timeout(config.timeout_s, 0);
        client.set_read_timeout(config.timeout_s, 0);
        httplib::Headers headers;
        const std::string key = resolve_key(config);
        if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

        auto res = client.Post(config.path, headers, body, "application/json");
        if (!res) throw EndpointError("no response from " + config.base_url);
        if (res->status != 200)
            throw EndpointError("status " + std::to_string(res->status) + " from " + config.base_url);
        try {
            const json reply = json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw EndpointError(std::string("malformed completion payload: ") + e.what());
        }
    }

    EndpointConfig config_;
    EndpointConfig judge_config_;
};

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::unique_ptr<QuestionnaireBackend> make_stub_backend(StubProfile profile, std::uint64_t seed) {
    return std::make_unique<StubBackend>(std::move(profile), seed);
}

std::unique_ptr<QuestionnaireBackend> make_http_backend(EndpointConfig config) {
    return std::make_unique<HttpBackend>(std::move(config));
}

std::unique_ptr<QuestionnaireBackend> make_http_backend(EndpointConfig config,
                                                        EndpointConfig judge_config) {
    return std::make_unique<HttpBackend>(std::move(config), std::move(judge_config));
}

std::string catalog_hash(const Catalog& catalog) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(detail::stable_hash(serialize_catalog(catalog))));
    return buf;
}

std::string serialize_manifest(const RunManifest& m) {
    json j{{"catalog_hash", m.catalog_hash},
           {"split_seed", m.split_seed},
           {"template_ids", m.template_ids},
           {"condition_keys", m.condition_keys},
           {"endpoint", m.endpoint},
           {"started_at", m.started_at},
           {"finished_at", m.finished_at},
           {"total_requests", m.total_requests},
           {"total_retries", m.total_retries},
           {"judge_calls", m.judge_calls}};
    return j.dump(2) + "\n";
}

RunResult run_questionnaire(QuestionnaireBackend& backend, const Catalog& catalog,
                            const RoleSet& roles, const std::vector<SteeringCondition>& conditions,
                            const DatasetSplit& split, const PromptTemplate& tmpl,
                            const RunOptions& options) {
    if (options.max_concurrency < 1) throw InvalidParameter("max_concurrency must be >= 1");
    if (options.max_retries < 0) throw InvalidParameter("max_retries must be >= 0");

    for (const auto& c : conditions) {
        if (c.kind == SteeringCondition::Kind::sae)
            throw UnsupportedCondition(
                "SAE conditions cannot be executed against a chat endpoint; ingest their "
                "responses from files instead (condition " + c.key() + ")");
        c.validate(&roles, &catalog);
    }
    backend.preflight();

    struct Task {
        const SteeringCondition* condition;
        const QuestionItem* question;
    };
    // canonical order up front: (condition key, question id)
    std::map<std::string, const SteeringCondition*> by_key;
    for (const auto& c : conditions) by_key.emplace(c.key(), &c);
    std::vector<Task> tasks;
    for (const auto& [key, cond] : by_key) {
        for (const auto& value : catalog.values()) {
            std::vector<std::string> qids = split.question_filter(*cond, value.id);
            std::sort(qids.begin(), qids.end());
            for (const auto& qid : qids) tasks.push_back({cond, &catalog.question(qid)});
        }
    }

    RunResult result;
    result.manifest.catalog_hash = catalog_hash(catalog);
    result.manifest.split_seed = split.seed;
    result.manifest.template_ids = {tmpl.id, "judge-v1"};
    for (const auto& [key, cond] : by_key) result.manifest.condition_keys.push_back(key);
    result.manifest.endpoint = backend.name();
    result.manifest.started_at = utc_now();

    std::vector<ResponseRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> requests{0};
    std::atomic<std::size_t> retries{0};
    std::atomic<std::size_t> judge_calls{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    std::atomic<bool> stop{false};

    auto call_with_retries = [&](const std::function<std::string()>& call) {
        for (int attempt = 0;; ++attempt) {
            try {
                requests.fetch_add(1);
                return call();
            } catch (const EndpointError&) {
                if (attempt >= options.max_retries) throw;
                retries.fetch_add(1);
                const double delay = options.backoff_base_s * static_cast<double>(1 << attempt);
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
        }
    };

    auto judge_text = [&](const std::string& text) {
        judge_calls.fetch_add(1);
        const std::string prompt = render_judge_prompt(text);
        const std::string reply = call_with_retries([&] { return backend.judge(prompt); });
        return parse_judge_reply(reply);
    };

    auto worker = [&] {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const Task& task = tasks[i];
                const RenderedPrompt prompt =
                    render_prompt(tmpl, *task.condition, roles, catalog, *task.question);
                const std::string raw = call_with_retries(
                    [&] { return backend.complete(*task.condition, *task.question, prompt); });
                ResponseRecord record;
                record.condition = *task.condition;
                record.condition.template_id = tmpl.id;
                record.question_id = task.question->id;
                std::tie(record.thought, record.answer) = split_thought_answer(raw);
                if (auto local = classify_answer(record.answer))
                    record.label = *local;
                else
                    record.label = judge_text(record.answer);
                if (options.judge_thoughts && !record.thought.empty())
                    record.thought_label = judge_text(record.thought);
                records[i] = std::move(record);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                stop.store(true);
                return;
            }
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(options.max_concurrency),
                              std::max<std::size_t>(tasks.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    result.records = std::move(records);
    result.manifest.finished_at = utc_now();
    result.manifest.total_requests = requests.load();
    result.manifest.total_retries = retries.load();
    result.manifest.judge_calls = judge_calls.load();
    return result;
}

} // namespace valsteer
