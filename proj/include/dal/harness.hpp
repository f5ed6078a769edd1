#pragma once

// Client for chat-completions endpoints and the recursive prompting loop that
// keeps asking a model to continue until it emits the final_result sentinel.

#include "json.hpp"

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dal {

enum class Role { User, Assistant };

std::string_view to_string(Role role) noexcept;

struct Turn {
    Role role = Role::User;
    std::string content;

    bool operator==(const Turn&) const = default;
};

struct EndpointConfig {
    std::string base_url;  // absolute http(s) URL; requests go to {base_url}/v1/chat/completions
    std::string model;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::chrono::milliseconds timeout{60'000};
    std::string api_key_env;  // bearer token source; empty or unset means no Authorization header
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{500};  // doubled after every failed attempt

    /// Throws std::invalid_argument describing the first invalid field.
    void validate() const;

    /// Keys: base_url, model, temperature, max_tokens, api_key_env, timeout_s,
    /// max_retries, and optionally retry_backoff_ms.
    static EndpointConfig from_json(const nlohmann::json& j);
};

struct GenerationOptions {
    int max_iterations = 10;
    std::string continuation_prompt = "continue";

    /// Reads the optional keys max_iterations and continuation_prompt.
    static GenerationOptions from_json(const nlohmann::json& j);
};

class HarnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Connection failure, timeout, or retryable HTTP status after all retries.
class TransportError : public HarnessError {
public:
    using HarnessError::HarnessError;
};

/// Response body that is not a chat completion, or a non-retryable status.
class ProtocolError : public HarnessError {
public:
    using HarnessError::HarnessError;
};

/// HTTP 401 or 403.
class AuthError : public HarnessError {
public:
    using HarnessError::HarnessError;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Returns the assistant text for one completion over `turns`.
    virtual std::string complete(std::span<const Turn> turns) const = 0;
};

class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(EndpointConfig config);
    std::string complete(std::span<const Turn> turns) const override;
    const EndpointConfig& config() const noexcept { return config_; }

private:
    EndpointConfig config_;
    std::string origin_;  // scheme://host[:port]
    std::string path_;    // URL prefix + "/v1/chat/completions"
};

/// Request body: {"model", "messages": [{"role", "content"}], "temperature", "max_tokens"}.
nlohmann::json chat_request_body(const EndpointConfig& config, std::span<const Turn> turns);

/// Extracts choices[0].message.content; throws ProtocolError otherwise.
std::string parse_chat_response(std::string_view body);

/// One chat-completion call with retries on transient failures.
std::string complete_once(const EndpointConfig& config, std::span<const Turn> turns);

struct SessionLog {
    std::string question;
    std::vector<Turn> turns;
    int iterations = 0;
    bool terminated = false;
    std::string stitched_output;  // assistant replies concatenated in order
};

/// Thrown when a completion fails mid-session; carries the turns so far.
class GenerationError : public HarnessError {
public:
    GenerationError(const std::string& what, SessionLog partial)
        : HarnessError(what), partial_(std::move(partial)) {}
    const SessionLog& partial() const noexcept { return partial_; }

private:
    SessionLog partial_;
};

/// Asks `question`, then keeps replaying the transcript plus a continuation
/// turn until the stitched output contains the sentinel or max_iterations
/// replies have been received.
SessionLog recursive_generate(const ChatClient& client, const std::string& question,
                              const GenerationOptions& options = {});
SessionLog recursive_generate(const EndpointConfig& config, const std::string& question,
                              const GenerationOptions& options = {});

struct SessionResult {
    SessionLog log;  // partial when error is set
    std::optional<std::string> error;

    bool ok() const noexcept { return !error.has_value(); }
};

/// recursive_generate over every question with at most `parallelism` sessions
/// in flight. Results are in input order; failures stay in their slot.
std::vector<SessionResult> batch_generate(const ChatClient& client, std::span<const std::string> questions,
                                          std::size_t parallelism, const GenerationOptions& options = {});

/// Runs fn(0..n-1) on up to `parallelism` worker threads.
void parallel_for(std::size_t n, std::size_t parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace dal
