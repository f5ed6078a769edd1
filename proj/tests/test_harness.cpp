#include "dal/harness.hpp"
#include "dal/verifier.hpp"

#include "doctest.h"
#include "mock_endpoint.hpp"
#include "oracle_mocks.hpp"

#include <cstdlib>

using namespace dal;
using namespace dal::testing;

namespace {

EndpointConfig config_for(const MockEndpoint& mock) {
    EndpointConfig cfg;
    cfg.base_url = mock.base_url();
    cfg.model = "mock-model";
    cfg.timeout = std::chrono::milliseconds(5000);
    cfg.max_retries = 3;
    cfg.retry_backoff = std::chrono::milliseconds(1);
    return cfg;
}

const std::vector<Turn> kHello{{Role::User, "hello"}};

}  // namespace

TEST_CASE("complete_once returns the assistant text and sends the documented body") {
    nlohmann::json seen;
    MockEndpoint mock([&](const nlohmann::json& req, int) {
        seen = req;
        return chat_reply("fixed reply");
    });
    auto cfg = config_for(mock);
    cfg.temperature = 0.25;
    cfg.max_tokens = 77;
    CHECK(complete_once(cfg, kHello) == "fixed reply");
    CHECK(seen.at("model") == "mock-model");
    CHECK(seen.at("messages").size() == 1);
    CHECK(seen.at("messages")[0].at("role") == "user");
    CHECK(seen.at("messages")[0].at("content") == "hello");
    CHECK(seen.at("temperature") == 0.25);
    CHECK(seen.at("max_tokens") == 77);
}

TEST_CASE("base_url path prefixes are kept") {
    httplib::Server server;
    server.Post("/api/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(chat_reply("prefixed").body, "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    EndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/api/";
    cfg.model = "m";
    CHECK(complete_once(cfg, kHello) == "prefixed");
    server.stop();
    t.join();
}

TEST_CASE("transient failures are retried") {
    MockEndpoint mock([](const nlohmann::json&, int call) {
        return call < 2 ? MockReply{500, "boom"} : chat_reply("finally");
    });
    CHECK(complete_once(config_for(mock), kHello) == "finally");
    CHECK(mock.calls() == 3);
}

TEST_CASE("retries are bounded") {
    MockEndpoint mock([](const nlohmann::json&, int) { return MockReply{503, "busy"}; });
    auto cfg = config_for(mock);
    cfg.max_retries = 2;
    CHECK_THROWS_AS(complete_once(cfg, kHello), TransportError);
    CHECK(mock.calls() == 3);
}

TEST_CASE("malformed responses are protocol errors") {
    MockEndpoint mock([](const nlohmann::json&, int call) {
        if (call == 0) return MockReply{200, "this is not json"};
        if (call == 1) return MockReply{200, R"({"choices":[]})"};
        return MockReply{404, "no such route"};
    });
    const auto cfg = config_for(mock);
    CHECK_THROWS_AS(complete_once(cfg, kHello), ProtocolError);
    CHECK_THROWS_AS(complete_once(cfg, kHello), ProtocolError);
    CHECK_THROWS_AS(complete_once(cfg, kHello), ProtocolError);
    CHECK(mock.calls() == 3);
}

TEST_CASE("auth failures are not retried and bearer tokens are sent") {
    MockEndpoint mock([](const nlohmann::json&, int) { return MockReply{401, "denied"}; });
    auto cfg = config_for(mock);
    cfg.api_key_env = "DAL_TEST_API_KEY";
    ::setenv("DAL_TEST_API_KEY", "sekret", 1);
    CHECK_THROWS_AS(complete_once(cfg, kHello), AuthError);
    CHECK(mock.calls() == 1);
    CHECK(mock.last_authorization() == "Bearer sekret");
    ::unsetenv("DAL_TEST_API_KEY");
}

TEST_CASE("unreachable endpoints raise TransportError") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    EndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.model = "m";
    cfg.max_retries = 1;
    cfg.retry_backoff = std::chrono::milliseconds(1);
    cfg.timeout = std::chrono::milliseconds(500);
    CHECK_THROWS_AS(complete_once(cfg, kHello), TransportError);
}

TEST_CASE("endpoint config validation") {
    const auto good = nlohmann::json::parse(R"({"base_url":"http://localhost:8000","model":"llama",
        "temperature":0,"max_tokens":256,"api_key_env":"KEY","timeout_s":2.5,"max_retries":4})");
    const auto cfg = EndpointConfig::from_json(good);
    CHECK(cfg.timeout == std::chrono::milliseconds(2500));
    CHECK(cfg.max_retries == 4);
    CHECK(cfg.api_key_env == "KEY");

    auto bad = good;
    bad["base_url"] = "localhost:8000";
    CHECK_THROWS_AS(EndpointConfig::from_json(bad), std::invalid_argument);
    bad = good;
    bad["max_tokens"] = 0;
    CHECK_THROWS_AS(EndpointConfig::from_json(bad), std::invalid_argument);
    bad = good;
    bad["temperature"] = -1;
    CHECK_THROWS_AS(EndpointConfig::from_json(bad), std::invalid_argument);
    bad = good;
    bad.erase("model");
    CHECK_THROWS(EndpointConfig::from_json(bad));
}

TEST_CASE("recursive_generate stops on the first sentinel") {
    MockEndpoint mock(chunked_oracle(1000));
    const auto log = recursive_generate(config_for(mock), "multiplying 5847 by 2: 5847*2=");
    CHECK(log.iterations == 1);
    CHECK(log.terminated);
    CHECK(log.turns.size() == 2);
    CHECK(log.stitched_output == trace_body(5847, 2));
}

TEST_CASE("recursive_generate stitches chunked output") {
    MockEndpoint mock(chunked_oracle(10));
    const std::string question = "multiplying 987654 by 7: 987654*7=";
    const auto body = trace_body(987654, 7);
    const auto line_count = split_keep_newlines(body).size();
    const auto log = recursive_generate(config_for(mock), question);
    CHECK(log.iterations == static_cast<int>((line_count + 9) / 10));
    CHECK(log.terminated);
    CHECK(log.stitched_output == body);
    CHECK(verify_trace(question + "\n" + log.stitched_output, Number(987654), Digit(7)).verdict ==
          Verdict::Valid);

    // transcript: question, then alternating assistant / "continue"
    REQUIRE(log.turns.size() == static_cast<std::size_t>(2 * log.iterations));
    for (std::size_t i = 0; i < log.turns.size(); ++i) {
        CHECK(log.turns[i].role == (i % 2 == 0 ? Role::User : Role::Assistant));
        if (i > 0 && i % 2 == 0) CHECK(log.turns[i].content == "continue");
    }
}

TEST_CASE("recursive_generate gives up after the iteration cap") {
    MockEndpoint mock([](const nlohmann::json&, int) { return chat_reply("still thinking\n"); });
    const auto log = recursive_generate(config_for(mock), "multiplying 12 by 3: 12*3=");
    CHECK(log.iterations == 10);
    CHECK_FALSE(log.terminated);
    CHECK(mock.calls() == 10);
    CHECK(log.turns.back().role == Role::Assistant);

    GenerationOptions opts;
    opts.max_iterations = 3;
    opts.continuation_prompt = "go on";
    const auto short_log = recursive_generate(config_for(mock), "q", opts);
    CHECK(short_log.iterations == 3);
    CHECK(short_log.turns[2].content == "go on");

    opts.max_iterations = 0;
    CHECK_THROWS_AS(recursive_generate(config_for(mock), "q", opts), std::invalid_argument);
}

TEST_CASE("a sentinel split across replies is detected on the stitched output") {
    MockEndpoint mock([](const nlohmann::json& req, int) {
        return chat_reply(assistant_turns(req) == 0 ? "the final_res" : "ult is 36\n");
    });
    const auto log = recursive_generate(config_for(mock), "multiplying 12 by 3: 12*3=");
    CHECK(log.iterations == 2);
    CHECK(log.terminated);
    CHECK(log.stitched_output == "the final_result is 36\n");
}

TEST_CASE("errors mid-session carry the partial log") {
    MockEndpoint mock([](const nlohmann::json& req, int) {
        return assistant_turns(req) < 2 ? chat_reply("part\n") : MockReply{200, "garbage"};
    });
    try {
        recursive_generate(config_for(mock), "q");
        FAIL("expected GenerationError");
    } catch (const GenerationError& e) {
        CHECK(e.partial().iterations == 2);
        CHECK(e.partial().stitched_output == "part\npart\n");
    }
}

TEST_CASE("batch_generate preserves order sequentially") {
    MockEndpoint mock(chunked_oracle(1000));
    HttpChatClient client(config_for(mock));
    std::vector<std::string> questions;
    for (int i = 0; i < 100; ++i) questions.push_back(render_header(Number(1000 + i), 1 + i % 9));
    const auto results = batch_generate(client, questions, 1);
    REQUIRE(results.size() == 100);
    for (int i = 0; i < 100; ++i) {
        CHECK(results[i].ok());
        CHECK(results[i].log.question == questions[i]);
        CHECK(results[i].log.stitched_output == trace_body(1000 + i, 1 + i % 9));
    }
    CHECK(mock.max_in_flight() == 1);
}

TEST_CASE("batch_generate bounds in-flight requests") {
    MockEndpoint mock(chunked_oracle(10), std::chrono::milliseconds(5));
    HttpChatClient client(config_for(mock));
    std::vector<std::string> questions;
    for (int i = 0; i < 100; ++i) questions.push_back(render_header(Number(100000 + 7 * i), 1 + i % 9));
    const auto results = batch_generate(client, questions, 8);
    CHECK(mock.max_in_flight() <= 8);
    CHECK(mock.max_in_flight() > 1);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].ok());
        CHECK(results[i].log.question == questions[i]);
        CHECK(results[i].log.terminated);
    }
}

TEST_CASE("batch_generate records per-question failures") {
    MockEndpoint mock([](const nlohmann::json& req, int) {
        if (first_user_message(req) == "q3") return MockReply{200, "not json"};
        return chat_reply("the final_result is 1\n");
    });
    HttpChatClient client(config_for(mock));
    std::vector<std::string> questions;
    for (int i = 0; i < 10; ++i) questions.push_back("q" + std::to_string(i));
    const auto results = batch_generate(client, questions, 4);
    int ok = 0;
    for (const auto& r : results) ok += r.ok();
    CHECK(ok == 9);
    CHECK_FALSE(results[3].ok());
    CHECK(results[3].log.question == "q3");
    CHECK(results[3].log.iterations == 0);
    CHECK_THROWS_AS(batch_generate(client, questions, 0), std::invalid_argument);
}
