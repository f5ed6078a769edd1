#include "dal/harness.hpp"

#include "dal/trace_text.hpp"

#include "httplib.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace dal {

namespace {

struct ParsedUrl {
    std::string origin;
    std::string prefix;
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("base_url must be absolute: '" + url + "'");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw std::invalid_argument("base_url scheme must be http or https: '" + url + "'");
    }
    const auto host_start = scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    ParsedUrl out;
    out.origin = url.substr(0, path_start);
    if (out.origin.size() == host_start) {
        throw std::invalid_argument("base_url has no host: '" + url + "'");
    }
    if (path_start != std::string::npos) {
        out.prefix = url.substr(path_start);
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

std::string_view to_string(Role role) noexcept { return role == Role::User ? "user" : "assistant"; }

void EndpointConfig::validate() const {
    split_url(base_url);
    if (model.empty()) throw std::invalid_argument("model must not be empty");
    if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
    if (timeout.count() <= 0) throw std::invalid_argument("timeout must be positive");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (retry_backoff.count() < 0) throw std::invalid_argument("retry backoff must be >= 0");
}

EndpointConfig EndpointConfig::from_json(const nlohmann::json& j) {
    EndpointConfig cfg;
    cfg.base_url = j.at("base_url").get<std::string>();
    cfg.model = j.at("model").get<std::string>();
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.max_tokens = j.value("max_tokens", cfg.max_tokens);
    cfg.api_key_env = j.value("api_key_env", std::string());
    if (j.contains("timeout_s")) {
        cfg.timeout = std::chrono::milliseconds(
            static_cast<std::int64_t>(j.at("timeout_s").get<double>() * 1000.0));
    }
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    if (j.contains("retry_backoff_ms")) {
        cfg.retry_backoff = std::chrono::milliseconds(j.at("retry_backoff_ms").get<std::int64_t>());
    }
    cfg.validate();
    return cfg;
}

GenerationOptions GenerationOptions::from_json(const nlohmann::json& j) {
    GenerationOptions opts;
    opts.max_iterations = j.value("max_iterations", opts.max_iterations);
    opts.continuation_prompt = j.value("continuation_prompt", opts.continuation_prompt);
    if (opts.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    return opts;
}

nlohmann::json chat_request_body(const EndpointConfig& config, std::span<const Turn> turns) {
    nlohmann::ordered_json body;
    body["model"] = config.model;
    body["messages"] = nlohmann::ordered_json::array();
    for (const auto& t : turns) {
        body["messages"].push_back({{"role", to_string(t.role)}, {"content", t.content}});
    }
    body["temperature"] = config.temperature;
    body["max_tokens"] = config.max_tokens;
    return body;
}

std::string parse_chat_response(std::string_view body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ProtocolError("response body is not JSON");
    try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (content.is_null()) return {};
        return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("response lacks choices[0].message.content: ") + e.what());
    }
}

HttpChatClient::HttpChatClient(EndpointConfig config) : config_(std::move(config)) {
    config_.validate();
    auto url = split_url(config_.base_url);
    origin_ = std::move(url.origin);
    path_ = url.prefix + "/v1/chat/completions";
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (origin_.starts_with("https")) {
        throw std::invalid_argument("https endpoints need a build with OpenSSL support");
    }
#endif
}

std::string HttpChatClient::complete(std::span<const Turn> turns) const {
    if (turns.empty()) throw std::invalid_argument("complete: no turns");

    httplib::Client http(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    http.set_connection_timeout(secs.count(), usecs.count());
    http.set_read_timeout(secs.count(), usecs.count());
    http.set_write_timeout(secs.count(), usecs.count());
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
            http.set_bearer_token_auth(key);
        }
    }

    const std::string body = chat_request_body(config_, turns).dump();
    std::string last_failure;
    auto backoff = config_.retry_backoff;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        auto res = http.Post(path_, body, "application/json");
        if (!res) {
            last_failure = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
        }
        if (retryable(res->status)) {
            last_failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw ProtocolError("unexpected HTTP status " + std::to_string(res->status) + ": " + res->body);
        }
        return parse_chat_response(res->body);
    }
    throw TransportError(origin_ + path_ + " failed after " + std::to_string(config_.max_retries + 1) +
                         " attempts; last error: " + last_failure);
}

std::string complete_once(const EndpointConfig& config, std::span<const Turn> turns) {
    return HttpChatClient(config).complete(turns);
}

SessionLog recursive_generate(const ChatClient& client, const std::string& question,
                              const GenerationOptions& options) {
    if (options.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

    SessionLog log;
    log.question = question;
    log.turns.push_back({Role::User, question});
    for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
        std::string reply;
        try {
            reply = client.complete(log.turns);
        } catch (const std::exception& e) {
            throw GenerationError(e.what(), log);
        }
        log.stitched_output += reply;
        log.turns.push_back({Role::Assistant, std::move(reply)});
        log.iterations = iteration;
        if (detect_terminal(log.stitched_output)) {
            log.terminated = true;
            break;
        }
        if (iteration < options.max_iterations) {
            log.turns.push_back({Role::User, options.continuation_prompt});
        }
    }
    return log;
}

SessionLog recursive_generate(const EndpointConfig& config, const std::string& question,
                              const GenerationOptions& options) {
    return recursive_generate(HttpChatClient(config), question, options);
}

void parallel_for(std::size_t n, std::size_t parallelism, const std::function<void(std::size_t)>& fn) {
    if (parallelism == 0) throw std::invalid_argument("parallelism must be >= 1");
    const std::size_t workers = std::min(parallelism, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

std::vector<SessionResult> batch_generate(const ChatClient& client, std::span<const std::string> questions,
                                          std::size_t parallelism, const GenerationOptions& options) {
    std::vector<SessionResult> results(questions.size());
    parallel_for(questions.size(), parallelism, [&](std::size_t i) {
        try {
            results[i].log = recursive_generate(client, questions[i], options);
        } catch (const GenerationError& e) {
            results[i].log = e.partial();
            results[i].error = e.what();
        }
    });
    return results;
}

}  // namespace dal
