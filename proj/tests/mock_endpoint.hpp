#pragma once

// In-process chat-completions server for tests. Handlers see the decoded
// request body and return a status plus raw response body.

#include "httplib.h"
#include "json.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

namespace dal::testing {

struct MockReply {
    int status = 200;
    std::string body;
};

inline MockReply chat_reply(const std::string& content) {
    nlohmann::json j;
    j["id"] = "mock";
    j["object"] = "chat.completion";
    j["choices"] = nlohmann::json::array(
        {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}, {"finish_reason", "stop"}}});
    return {200, j.dump()};
}

class MockEndpoint {
public:
    using Handler = std::function<MockReply(const nlohmann::json& request, int call_index)>;

    explicit MockEndpoint(Handler handler, std::chrono::milliseconds delay = {})
        : handler_(std::move(handler)), delay_(delay) {
        server_.new_task_queue = [] { return new httplib::ThreadPool(48); };
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const int in_flight = ++in_flight_;
            for (int seen = max_in_flight_.load(); in_flight > seen && !max_in_flight_.compare_exchange_weak(seen, in_flight);) {
            }
            const int call = calls_++;
            {
                std::lock_guard lock(mutex_);
                last_authorization_ = req.get_header_value("Authorization");
            }
            if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
            MockReply reply;
            const auto body = nlohmann::json::parse(req.body, nullptr, false);
            if (body.is_discarded()) {
                reply = {400, "bad request"};
            } else {
                reply = handler_(body, call);
            }
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
            --in_flight_;
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockEndpoint() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    MockEndpoint(const MockEndpoint&) = delete;
    MockEndpoint& operator=(const MockEndpoint&) = delete;

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int calls() const { return calls_.load(); }
    int max_in_flight() const { return max_in_flight_.load(); }
    std::string last_authorization() const {
        std::lock_guard lock(mutex_);
        return last_authorization_;
    }

private:
    Handler handler_;
    std::chrono::milliseconds delay_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> calls_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
    mutable std::mutex mutex_;
    std::string last_authorization_;
};

/// Number of assistant messages already in the request transcript.
inline int assistant_turns(const nlohmann::json& request) {
    int n = 0;
    for (const auto& msg : request.at("messages")) n += msg.at("role") == "assistant";
    return n;
}

}  // namespace dal::testing
