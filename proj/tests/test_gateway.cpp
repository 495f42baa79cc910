#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <thread>

#include "httplib.h"

#include "agentaudit/errors.hpp"
#include "agentaudit/gateway.hpp"

using namespace agentaudit;

namespace {

CompletionRequest simple_request(const std::string& text, const std::string& backend = "mock") {
    CompletionRequest req;
    req.backend_id = backend;
    req.messages = {{"user", text}};
    req.stage = "judging";
    return req;
}

class FlakyBackend : public Backend {
public:
    explicit FlakyBackend(int failures_before_success)
        : remaining_failures_(failures_before_success) {}

    std::string id() const override { return "flaky"; }
    CompletionResponse complete(const CompletionRequest&) override {
        ++attempts_;
        if (remaining_failures_-- > 0)
            fail(ErrorCode::BackendUnavailable, "transient failure");
        CompletionResponse resp;
        resp.text = "finally";
        resp.prompt_tokens = 5;
        resp.completion_tokens = 1;
        return resp;
    }

    int attempts() const { return attempts_; }

private:
    int remaining_failures_;
    std::atomic<int> attempts_{0};
};

} // namespace

TEST_CASE("mock backend returns canned responses with zero usage") {
    Gateway gateway;
    auto backend = std::make_shared<MockBackend>("mock");
    CompletionRequest req = simple_request("hello");
    CompletionResponse canned;
    canned.text = "canned answer";
    backend->can_response(req.cache_key(), canned);
    gateway.register_backend(backend);

    CompletionResponse resp = gateway.complete(req);
    CHECK(resp.text == "canned answer");
    CHECK(resp.prompt_tokens == 0);
    CHECK(resp.completion_tokens == 0);
    CHECK(!resp.from_cache);
}

TEST_CASE("repeated identical requests hit the cache") {
    Gateway gateway;
    auto backend = std::make_shared<MockBackend>("mock");
    gateway.register_backend(backend);

    CompletionRequest req = simple_request("same thing");
    CompletionResponse first = gateway.complete(req);
    CompletionResponse second = gateway.complete(req);
    CHECK(!first.from_cache);
    CHECK(second.from_cache);
    CHECK(second.text == first.text);
    CHECK(backend->dispatch_count() == 1);
}

TEST_CASE("cache idempotence: N identical requests cause one dispatch") {
    Gateway gateway;
    auto backend = std::make_shared<MockBackend>("mock");
    gateway.register_backend(backend);

    CompletionRequest req = simple_request("dedupe me");
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&] { gateway.complete(req); });
    }
    for (auto& t : threads) t.join();
    CHECK(backend->dispatch_count() == 1);
}

TEST_CASE("disk cache survives a new gateway instance") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "agentaudit_gwcache";
    fs::remove_all(dir);

    CompletionRequest req = simple_request("persist me");
    {
        Gateway gateway;
        gateway.register_backend(std::make_shared<MockBackend>("mock"));
        gateway.set_cache_dir(dir);
        gateway.complete(req);
    }
    {
        Gateway gateway;
        auto backend = std::make_shared<MockBackend>("mock");
        gateway.register_backend(backend);
        gateway.set_cache_dir(dir);
        CompletionResponse resp = gateway.complete(req);
        CHECK(resp.from_cache);
        CHECK(backend->dispatch_count() == 0);
    }
    fs::remove_all(dir);
}

TEST_CASE("token estimator counts words and punctuation") {
    CHECK(estimate_tokens("three plain words") == 3);
    CHECK(estimate_tokens("hello, world!") == 4);
    CHECK(estimate_tokens("") == 0);
}

TEST_CASE("budget ceiling rejects before dispatch") {
    Gateway gateway;
    auto backend = std::make_shared<MockBackend>("mock");
    gateway.register_backend(backend);
    gateway.set_token_budget(100);

    std::string long_text;
    for (int i = 0; i < 150; ++i) long_text += "word" + std::to_string(i) + " ";
    CompletionRequest req = simple_request(long_text);
    REQUIRE(estimate_tokens(long_text) >= 150);

    try {
        gateway.complete(req);
        FAIL("expected BudgetExceeded");
    } catch (const AuditError& e) {
        CHECK(e.code() == ErrorCode::BudgetExceeded);
    }
    CHECK(backend->dispatch_count() == 0);
}

TEST_CASE("transient failures are retried with backoff, then surface") {
    Gateway gateway;
    gateway.set_retry_base_delay_ms(1);
    auto flaky = std::make_shared<FlakyBackend>(2);
    gateway.register_backend(flaky);

    CompletionResponse resp = gateway.complete(simple_request("try hard", "flaky"));
    CHECK(resp.text == "finally");
    CHECK(flaky->attempts() == 3);

    Gateway strict;
    strict.set_retry_base_delay_ms(1);
    strict.register_backend(std::make_shared<FlakyBackend>(10));
    try {
        strict.complete(simple_request("hopeless", "flaky"));
        FAIL("expected BackendUnavailable");
    } catch (const AuditError& e) {
        CHECK(e.code() == ErrorCode::BackendUnavailable);
    }
}

TEST_CASE("usage accounting conserves totals across stages and backends") {
    UsageAccount account;
    account.record("mock", "fcg-validation", 100, 20);
    account.record("mock", "synthesis", 200, 40);
    account.record("remote", "judging", 300, 60);

    UsageSummary summary = report_usage(account);
    long stage_sum = 0;
    for (const auto& [stage, tokens] : summary.per_stage) stage_sum += tokens;
    long backend_sum = 0;
    for (const auto& [backend, tokens] : summary.per_backend) backend_sum += tokens;
    CHECK(summary.grand_total == 720);
    CHECK(stage_sum == summary.grand_total);
    CHECK(backend_sum == summary.grand_total);

    SUBCASE("zero calls give an all-zero summary") {
        UsageAccount empty;
        UsageSummary zero = report_usage(empty);
        CHECK(zero.grand_total == 0);
        CHECK(zero.cost_per_chain_millions == 0.0);
    }
}

TEST_CASE("cost per verified chain reproduces the 0.012M arithmetic") {
    UsageAccount account;
    account.record("judge", "judging", 30000, 6000);
    account.record_chain_verified();
    account.record_chain_verified();
    account.record_chain_verified();

    UsageSummary summary = report_usage(account);
    CHECK(summary.grand_total == 36000);
    CHECK(summary.chains_verified == 3);
    CHECK(summary.cost_per_chain_millions == doctest::Approx(0.012));
    CHECK(render_usage(summary).find("0.012M") != std::string::npos);
}

TEST_CASE("in-flight cap bounds concurrent dispatches") {
    class CountingBackend : public Backend {
    public:
        std::string id() const override { return "counting"; }
        CompletionResponse complete(const CompletionRequest&) override {
            int now = ++active_;
            int seen = peak_.load();
            while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            --active_;
            CompletionResponse resp;
            resp.text = "ok";
            return resp;
        }
        int peak() const { return peak_.load(); }

    private:
        std::atomic<int> active_{0};
        std::atomic<int> peak_{0};
    };

    Gateway gateway;
    auto backend = std::make_shared<CountingBackend>();
    gateway.register_backend(backend);
    gateway.set_max_in_flight(2);

    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&gateway, i] {
            gateway.complete(simple_request("distinct " + std::to_string(i), "counting"));
        });
    }
    for (auto& t : threads) t.join();
    CHECK(backend->peak() <= 2);
    CHECK(backend->peak() >= 1);
}

TEST_CASE("mock responses are a function of the cache key only") {
    auto backend = std::make_shared<MockBackend>("mock");
    CompletionRequest req = simple_request("deterministic");
    CompletionResponse a = backend->complete(req);
    CompletionResponse b = backend->complete(req);
    CHECK(a.text == b.text);

    CompletionRequest other = simple_request("different");
    CHECK(backend->complete(other).text != a.text);
}

TEST_CASE("http backend speaks the chat-completions dialect against a local server") {
    httplib::Server server;
    std::atomic<bool> saw_messages{false};
    server.Post("/v1/chat/completions",
                [&saw_messages](const httplib::Request& req, httplib::Response& res) {
                    auto body = nlohmann::json::parse(req.body, nullptr, false);
                    saw_messages = body.is_object() && body.contains("messages");
                    nlohmann::json reply = {
                        {"choices",
                         nlohmann::json::array({{{"message",
                                                  {{"role", "assistant"},
                                                   {"content", "local says hi"}}}}})},
                        {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}};
                    res.set_content(reply.dump(), "application/json");
                });

    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig config;
    config.id = "local";
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    HttpBackend backend(config);

    CompletionRequest req = simple_request("ping", "local");
    try {
        CompletionResponse resp = backend.complete(req);
        CHECK(resp.text == "local says hi");
        CHECK(resp.prompt_tokens == 12);
        CHECK(resp.completion_tokens == 3);
        CHECK(saw_messages);
    } catch (...) {
        server.stop();
        server_thread.join();
        throw;
    }

    server.stop();
    server_thread.join();
}
