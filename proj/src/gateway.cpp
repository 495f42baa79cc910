#include "agentaudit/gateway.hpp"

#include <chrono>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"

#include "agentaudit/errors.hpp"

namespace agentaudit {

using nlohmann::json;

std::string digest_hex(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

long estimate_tokens(std::string_view text) {
    long tokens = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (!in_word) ++tokens;
            in_word = true;
        } else {
            in_word = false;
            if (!std::isspace(c)) ++tokens;   // punctuation counts one apiece
        }
    }
    return tokens;
}

std::string CompletionRequest::cache_key() const {
    json doc;
    doc["backend"] = backend_id;
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    doc["messages"] = std::move(msgs);
    doc["temperature"] = temperature;
    if (!tool_schemas.empty()) {
        json schemas = json::array();
        for (const auto& s : tool_schemas)
            schemas.push_back({{"name", s.name}, {"description", s.description}, {"parameters", s.parameters}});
        doc["tools"] = std::move(schemas);
    }
    return digest_hex(doc.dump());
}

json completion_response_to_json(const CompletionResponse& resp) {
    json doc;
    if (resp.text) doc["text"] = *resp.text;
    if (resp.tool_call)
        doc["tool_call"] = {{"function", resp.tool_call->function}, {"args", resp.tool_call->args}};
    doc["usage"] = {{"prompt_tokens", resp.prompt_tokens},
                    {"completion_tokens", resp.completion_tokens}};
    return doc;
}

CompletionResponse completion_response_from_json(const json& doc) {
    CompletionResponse resp;
    if (doc.contains("text")) resp.text = doc["text"].get<std::string>();
    if (doc.contains("tool_call")) {
        resp.tool_call = ToolCallResult{doc["tool_call"]["function"].get<std::string>(),
                                        doc["tool_call"]["args"]};
    }
    if (doc.contains("usage")) {
        resp.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
        resp.completion_tokens = doc["usage"].value("completion_tokens", 0L);
    }
    return resp;
}

CompletionResponse MockBackend::complete(const CompletionRequest& req) {
    std::lock_guard<std::mutex> lock(mu_);
    ++dispatch_count_;
    auto it = canned_.find(req.cache_key());
    if (it != canned_.end()) {
        CompletionResponse resp = it->second;
        resp.prompt_tokens = 0;
        resp.completion_tokens = 0;
        return resp;
    }
    if (!scripted_.empty()) {
        CompletionResponse resp = scripted_.front();
        scripted_.pop_front();
        resp.prompt_tokens = 0;
        resp.completion_tokens = 0;
        return resp;
    }
    CompletionResponse resp;
    resp.text = "mock:" + req.cache_key();
    return resp;
}

void MockBackend::can_response(const std::string& cache_key, CompletionResponse response) {
    std::lock_guard<std::mutex> lock(mu_);
    canned_[cache_key] = std::move(response);
}

void MockBackend::push_scripted(CompletionResponse response) {
    std::lock_guard<std::mutex> lock(mu_);
    scripted_.push_back(std::move(response));
}

CompletionResponse HttpBackend::complete(const CompletionRequest& req) {
    json body;
    body["model"] = config_.model;
    body["temperature"] = req.temperature;
    if (req.max_tokens > 0) body["max_tokens"] = req.max_tokens;
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(msgs);
    if (!req.tool_schemas.empty()) {
        json tools = json::array();
        for (const auto& s : req.tool_schemas) {
            tools.push_back({{"type", "function"},
                             {"function",
                              {{"name", s.name},
                               {"description", s.description},
                               {"parameters", s.parameters}}}});
        }
        body["tools"] = std::move(tools);
    }

    // base_url may carry a path prefix ("http://host:port/v1"); httplib wants
    // the origin in the client and the full path per request.
    std::string origin = config_.base_url;
    std::string prefix;
    std::size_t scheme_end = origin.find("://");
    std::size_t path_start =
        origin.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start != std::string::npos) {
        prefix = origin.substr(path_start);
        origin = origin.substr(0, path_start);
        if (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }

    httplib::Client client(origin);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto res = client.Post(prefix + "/chat/completions", headers, body.dump(), "application/json");
    if (!res || res->status / 100 != 2)
        fail(ErrorCode::BackendUnavailable,
             config_.id + " HTTP " + (res ? std::to_string(res->status) : "no response"));

    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty())
        fail(ErrorCode::BackendUnavailable, config_.id + " returned an unparseable completion");

    const json& message = doc["choices"][0]["message"];
    CompletionResponse resp;
    if (message.contains("tool_calls") && !message["tool_calls"].empty()) {
        const json& call = message["tool_calls"][0]["function"];
        json args = json::parse(call.value("arguments", "{}"), nullptr, false);
        resp.tool_call = ToolCallResult{call.value("name", ""),
                                        args.is_discarded() ? json::object() : args};
    } else {
        resp.text = message.value("content", "");
    }
    if (doc.contains("usage")) {
        resp.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
        resp.completion_tokens = doc["usage"].value("completion_tokens", 0L);
    } else {
        long estimate = 0;
        for (const auto& m : req.messages) estimate += estimate_tokens(m.content);
        resp.prompt_tokens = estimate;
        resp.completion_tokens = resp.text ? estimate_tokens(*resp.text) : 0;
    }
    return resp;
}

void UsageAccount::record(const std::string& backend_id, const std::string& stage,
                          long prompt_tokens, long completion_tokens) {
    std::lock_guard<std::mutex> lock(mu_);
    stage_totals_[stage] += prompt_tokens + completion_tokens;
    backend_totals_[backend_id] += prompt_tokens + completion_tokens;
}

void UsageAccount::record_chain_verified() {
    std::lock_guard<std::mutex> lock(mu_);
    ++chains_verified_;
}

long UsageAccount::grand_total() const {
    std::lock_guard<std::mutex> lock(mu_);
    long total = 0;
    for (const auto& [stage, tokens] : stage_totals_) total += tokens;
    return total;
}

std::map<std::string, long> UsageAccount::per_stage() const {
    std::lock_guard<std::mutex> lock(mu_);
    return stage_totals_;
}

std::map<std::string, long> UsageAccount::per_backend() const {
    std::lock_guard<std::mutex> lock(mu_);
    return backend_totals_;
}

long UsageAccount::chains_verified() const {
    std::lock_guard<std::mutex> lock(mu_);
    return chains_verified_;
}

UsageSummary report_usage(const UsageAccount& account) {
    UsageSummary s;
    s.per_stage = account.per_stage();
    s.per_backend = account.per_backend();
    s.grand_total = account.grand_total();
    s.chains_verified = account.chains_verified();
    if (s.chains_verified > 0)
        s.cost_per_chain_millions =
            static_cast<double>(s.grand_total) / static_cast<double>(s.chains_verified) / 1e6;
    return s;
}

std::string render_usage(const UsageSummary& summary) {
    char buf[64];
    std::string out = "tokens total " + std::to_string(summary.grand_total);
    if (!summary.per_stage.empty()) {
        out += " (";
        bool first = true;
        for (const auto& [stage, tokens] : summary.per_stage) {
            if (!first) out += ", ";
            first = false;
            out += stage + " " + std::to_string(tokens);
        }
        out += ")";
    }
    std::snprintf(buf, sizeof(buf), "%.3fM", summary.cost_per_chain_millions);
    out += "; verified chains " + std::to_string(summary.chains_verified);
    out += "; cost/chain " + std::string(buf);
    return out;
}

json usage_to_json(const UsageSummary& summary) {
    json doc;
    doc["grand_total"] = summary.grand_total;
    doc["per_stage"] = summary.per_stage;
    doc["per_backend"] = summary.per_backend;
    doc["chains_verified"] = summary.chains_verified;
    doc["cost_per_chain_millions"] = summary.cost_per_chain_millions;
    return doc;
}

UsageSummary usage_from_json(const json& doc) {
    UsageSummary s;
    s.grand_total = doc.value("grand_total", 0L);
    if (doc.contains("per_stage"))
        s.per_stage = doc["per_stage"].get<std::map<std::string, long>>();
    if (doc.contains("per_backend"))
        s.per_backend = doc["per_backend"].get<std::map<std::string, long>>();
    s.chains_verified = doc.value("chains_verified", 0L);
    s.cost_per_chain_millions = doc.value("cost_per_chain_millions", 0.0);
    return s;
}

void Gateway::register_backend(std::shared_ptr<Backend> backend) {
    backends_[backend->id()] = std::move(backend);
}

void Gateway::set_max_in_flight(int limit) {
    std::lock_guard<std::mutex> lock(dispatch_mu_);
    max_in_flight_ = limit;
}

bool Gateway::has_backend(const std::string& id) const { return backends_.count(id) > 0; }

void Gateway::set_cache_dir(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    cache_dir_ = dir;
}

std::optional<CompletionResponse> Gateway::cache_lookup(const std::string& key) {
    auto it = memory_cache_.find(key);
    if (it != memory_cache_.end()) return it->second;
    if (cache_dir_) {
        std::filesystem::path file = *cache_dir_ / (key + ".json");
        std::ifstream in(file);
        if (in) {
            json doc = json::parse(in, nullptr, false);
            if (!doc.is_discarded() && doc.contains("response")) {
                CompletionResponse resp = completion_response_from_json(doc["response"]);
                memory_cache_[key] = resp;
                return resp;
            }
        }
    }
    return std::nullopt;
}

void Gateway::cache_store(const std::string& key, const CompletionRequest& req,
                          const CompletionResponse& resp) {
    memory_cache_[key] = resp;
    if (!cache_dir_) return;
    json doc;
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    doc["request"] = {{"backend", req.backend_id},
                      {"messages", std::move(msgs)},
                      {"temperature", req.temperature}};
    doc["response"] = completion_response_to_json(resp);
    std::ofstream out(*cache_dir_ / (key + ".json"));
    out << doc.dump(2) << "\n";
}

CompletionResponse Gateway::complete(const CompletionRequest& req) {
    auto it = backends_.find(req.backend_id);
    if (it == backends_.end())
        fail(ErrorCode::BackendUnavailable, "no backend registered as \"" + req.backend_id + "\"");
    Backend& backend = *it->second;

    const std::string key = req.cache_key();

    // Identical concurrent requests serialize on a per-key mutex; the losers
    // find the winner's cache entry instead of re-dispatching.
    std::shared_ptr<std::mutex> key_mu;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto& slot = in_flight_[key];
        if (!slot) slot = std::make_shared<std::mutex>();
        key_mu = slot;
    }
    std::lock_guard<std::mutex> key_lock(*key_mu);

    {
        std::lock_guard<std::mutex> lock(mu_);
        if (auto hit = cache_lookup(key)) {
            hit->from_cache = true;
            return *hit;
        }
    }

    if (token_budget_) {
        long estimate = 0;
        for (const auto& m : req.messages) estimate += estimate_tokens(m.content);
        if (usage_.grand_total() + estimate > *token_budget_)
            fail(ErrorCode::BudgetExceeded,
                 "request of ~" + std::to_string(estimate) + " tokens exceeds ceiling " +
                     std::to_string(*token_budget_));
    }

    struct DispatchSlot {
        Gateway* gateway;
        explicit DispatchSlot(Gateway* g) : gateway(g) {
            std::unique_lock<std::mutex> lock(g->dispatch_mu_);
            g->dispatch_cv_.wait(lock, [g] {
                return g->max_in_flight_ <= 0 || g->dispatching_ < g->max_in_flight_;
            });
            ++g->dispatching_;
        }
        ~DispatchSlot() {
            {
                std::lock_guard<std::mutex> lock(gateway->dispatch_mu_);
                --gateway->dispatching_;
            }
            gateway->dispatch_cv_.notify_one();
        }
    } slot(this);

    CompletionResponse resp;
    int attempt = 0;
    for (;;) {
        try {
            resp = backend.complete(req);
            break;
        } catch (const AuditError& e) {
            if (e.code() != ErrorCode::BackendUnavailable || ++attempt >= max_attempts_) throw;
            std::this_thread::sleep_for(
                std::chrono::milliseconds(retry_base_delay_ms_ * (1 << (attempt - 1))));
        }
    }

    usage_.record(req.backend_id, req.stage, resp.prompt_tokens, resp.completion_tokens);
    {
        std::lock_guard<std::mutex> lock(mu_);
        cache_store(key, req, resp);
    }
    return resp;
}

} // namespace agentaudit
