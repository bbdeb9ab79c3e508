#pragma once

// In-process chat-completions fixture server for runner tests: every distinct
// request body fails a configurable number of times with 429 before
// succeeding, which exercises the retry path deterministically.

#include <atomic>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "valsteer/detail/rng.hpp"

namespace valsteer::test {

class FixtureServer {
public:
    explicit FixtureServer(int failures_per_request, std::string reply_content = "")
        : failures_(failures_per_request), reply_content_(std::move(reply_content)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            requests_.fetch_add(1);
            {
                std::lock_guard<std::mutex> lock(mutex_);
                const std::uint64_t key = detail::stable_hash(req.body);
                if (++attempts_[key] <= failures_) {
                    res.status = 429;
                    res.set_content("slow down", "text/plain");
                    return;
                }
            }
            if (!auth_header_ok(req)) {
                res.status = 401;
                res.set_content("unauthorized", "text/plain");
                return;
            }
            const std::string content =
                reply_content_.empty() ? default_content(req.body) : reply_content_;
            nlohmann::json reply{{"choices", {{{"message", {{"content", content}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FixtureServer() {
        server_.stop();
        thread_.join();
    }

    FixtureServer(const FixtureServer&) = delete;
    FixtureServer& operator=(const FixtureServer&) = delete;

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int request_count() const { return requests_.load(); }
    void require_bearer(std::string token) { bearer_ = std::move(token); }

private:
    bool auth_header_ok(const httplib::Request& req) const {
        if (bearer_.empty()) return true;
        auto it = req.headers.find("Authorization");
        return it != req.headers.end() && it->second == "Bearer " + bearer_;
    }

    static std::string default_content(const std::string& body) {
        // judge prompts get a bare label, questionnaire prompts a CoT reply
        if (body.find("Summarize the judgment") != std::string::npos) return "yes";
        return "Thought: the fixture always agrees. Answer: yes";
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    int failures_ = 0;
    std::string reply_content_;
    std::string bearer_;
    std::atomic<int> requests_{0};
    std::map<std::uint64_t, int> attempts_;
    std::mutex mutex_;
};

} // namespace valsteer::test
