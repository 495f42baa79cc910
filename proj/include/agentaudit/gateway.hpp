#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace agentaudit {

struct ChatMessage {
    std::string role;      // system | user | assistant | tool
    std::string content;
};

struct ToolSchema {
    std::string name;
    std::string description;
    nlohmann::json parameters;   // JSON-schema-style parameter table
};

struct CompletionRequest {
    std::string backend_id;
    std::vector<ChatMessage> messages;
    std::vector<ToolSchema> tool_schemas;
    double temperature = 0.0;
    int max_tokens = 0;                  // 0 = backend default
    std::string stage = "general";       // usage bucket: fcg-validation | synthesis | judging | policy

    /// Digest over (backend, messages, temperature, schemas); the cache and
    /// in-flight de-duplication key.
    std::string cache_key() const;
};

struct ToolCallResult {
    std::string function;
    nlohmann::json args;
};

struct CompletionResponse {
    std::optional<std::string> text;
    std::optional<ToolCallResult> tool_call;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    bool from_cache = false;
};

/// Whitespace/punctuation token count; stands in for backend usage numbers
/// when budgeting, documented as approximate.
long estimate_tokens(std::string_view text);

/// 64-bit FNV-1a rendered as 16 hex characters.
std::string digest_hex(std::string_view data);

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    virtual CompletionResponse complete(const CompletionRequest& req) = 0;
};

/// Offline backend. Responses come from (in priority order) the canned map
/// keyed by cache key, the scripted queue, or a deterministic echo of the
/// cache key. Usage is always {0, 0}.
class MockBackend : public Backend {
public:
    explicit MockBackend(std::string id = "mock") : id_(std::move(id)) {}

    std::string id() const override { return id_; }
    CompletionResponse complete(const CompletionRequest& req) override;

    void can_response(const std::string& cache_key, CompletionResponse response);
    void push_scripted(CompletionResponse response);

    int dispatch_count() const { return dispatch_count_; }

private:
    std::string id_;
    std::map<std::string, CompletionResponse> canned_;
    std::deque<CompletionResponse> scripted_;
    std::mutex mu_;
    int dispatch_count_ = 0;
};

/// OpenAI-compatible chat-completion client over HTTP. The API key is read
/// from the environment variable named in the config, never from files.
struct HttpBackendConfig {
    std::string id;
    std::string base_url;       // e.g. http://host:port/v1
    std::string model;
    std::string api_key_env;
    int timeout_seconds = 60;
};

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

    std::string id() const override { return config_.id; }
    CompletionResponse complete(const CompletionRequest& req) override;

private:
    HttpBackendConfig config_;
};

/// Token tallies per backend and per pipeline stage; monotonically
/// non-decreasing, safe for concurrent writers.
class UsageAccount {
public:
    void record(const std::string& backend_id, const std::string& stage, long prompt_tokens,
                long completion_tokens);
    void record_chain_verified();

    long grand_total() const;
    std::map<std::string, long> per_stage() const;
    std::map<std::string, long> per_backend() const;
    long chains_verified() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, long> stage_totals_;
    std::map<std::string, long> backend_totals_;
    long chains_verified_ = 0;
};

struct UsageSummary {
    long grand_total = 0;
    std::map<std::string, long> per_stage;
    std::map<std::string, long> per_backend;
    long chains_verified = 0;
    double cost_per_chain_millions = 0.0;   // grand total / chains, in millions of tokens

    bool operator==(const UsageSummary& other) const = default;
};

UsageSummary report_usage(const UsageAccount& account);
std::string render_usage(const UsageSummary& summary);
nlohmann::json usage_to_json(const UsageSummary& summary);
UsageSummary usage_from_json(const nlohmann::json& doc);

/// Uniform client over the registered backends: response cache (memory plus
/// optional on-disk directory, one file per cache key), bounded-backoff
/// retries, in-flight de-duplication of identical concurrent requests, token
/// budget enforcement before dispatch, and usage recording on cache misses.
class Gateway {
public:
    Gateway() = default;

    void register_backend(std::shared_ptr<Backend> backend);
    bool has_backend(const std::string& id) const;
    void set_cache_dir(const std::filesystem::path& dir);
    void set_token_budget(std::optional<long> budget) { token_budget_ = budget; }
    void set_max_attempts(int attempts) { max_attempts_ = attempts; }
    void set_retry_base_delay_ms(int ms) { retry_base_delay_ms_ = ms; }
    /// Caps concurrent backend dispatches (0 = unlimited); callers over the
    /// cap block until a slot frees.
    void set_max_in_flight(int limit);

    /// Throws BackendUnavailable after exhausting retries and BudgetExceeded
    /// when the estimated request size would cross the configured ceiling.
    CompletionResponse complete(const CompletionRequest& req);

    UsageAccount& usage() { return usage_; }
    const UsageAccount& usage() const { return usage_; }

private:
    std::optional<CompletionResponse> cache_lookup(const std::string& key);
    void cache_store(const std::string& key, const CompletionRequest& req,
                     const CompletionResponse& resp);

    std::map<std::string, std::shared_ptr<Backend>> backends_;
    std::map<std::string, CompletionResponse> memory_cache_;
    std::optional<std::filesystem::path> cache_dir_;
    std::optional<long> token_budget_;
    int max_attempts_ = 3;
    int retry_base_delay_ms_ = 50;
    UsageAccount usage_;

    std::mutex mu_;
    std::map<std::string, std::shared_ptr<std::mutex>> in_flight_;

    std::mutex dispatch_mu_;
    std::condition_variable dispatch_cv_;
    int max_in_flight_ = 0;
    int dispatching_ = 0;
};

nlohmann::json completion_response_to_json(const CompletionResponse& resp);
CompletionResponse completion_response_from_json(const nlohmann::json& doc);

} // namespace agentaudit
