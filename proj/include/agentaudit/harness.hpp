#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "agentaudit/chains.hpp"
#include "agentaudit/gateway.hpp"
#include "agentaudit/synthesis.hpp"
#include "agentaudit/tool_model.hpp"

namespace agentaudit {

enum class Observation { SourceFunction, ToolFunction, SinkFunction };
const char* to_string(Observation kind);
Observation observation_for_role(Role role);

struct TraceStep {
    int index = 0;
    std::string function;
    nlohmann::json args = nlohmann::json::object();
    nlohmann::json result;
    Observation kind = Observation::ToolFunction;
};

struct Trace {
    std::string prompt_ref;
    std::vector<TraceStep> steps;
    std::string final_response;
    bool budget_exhausted = false;
};

struct AgentAction {
    bool finish = false;
    std::string function;
    nlohmann::json args;
    std::string text;

    static AgentAction invoke(std::string fn, nlohmann::json call_args) {
        AgentAction a;
        a.function = std::move(fn);
        a.args = std::move(call_args);
        return a;
    }
    static AgentAction finished(std::string response) {
        AgentAction a;
        a.finish = true;
        a.text = std::move(response);
        return a;
    }
};

/// Decision policy contract; implementations must finish within the step
/// budget the runner enforces.
class AgentPolicy {
public:
    virtual ~AgentPolicy() = default;
    virtual AgentAction decide(const Trace& so_far, const ToolSet& ts) = 0;
};

/// Sandboxed runtime: source functions read seeded assets, sink functions
/// append to the in-memory outbox and deliver nothing externally. Behaviors
/// are overridable per function for faithful tool simulations.
class EnvironmentState {
public:
    using Handler = std::function<nlohmann::json(const nlohmann::json& args)>;

    EnvironmentState(const ToolSet& ts, AssetCollection assets);

    /// Dispatches one call: a registered handler if present, otherwise the
    /// role-based default (source → asset record lookup, plain → argument
    /// echo, sink → outbox append). Throws UnknownFunction.
    nlohmann::json invoke(const std::string& function, const nlohmann::json& args);

    void register_handler(const std::string& function, Handler handler);

    const std::vector<nlohmann::json>& outbox() const { return outbox_; }
    const std::vector<std::string>& mutation_log() const { return mutation_log_; }
    const ToolSet& toolset() const { return *toolset_; }
    const AssetCollection& assets() const { return assets_; }

    /// Fresh copy with empty outbox for parallel executions.
    EnvironmentState clone() const;

private:
    nlohmann::json default_source(const FunctionSpec& fn, const nlohmann::json& args) const;
    nlohmann::json default_sink(const FunctionSpec& fn, const nlohmann::json& args);

    const ToolSet* toolset_;
    AssetCollection assets_;
    std::map<std::string, Handler> handlers_;
    std::vector<nlohmann::json> outbox_;
    std::vector<std::string> mutation_log_;
};

/// Runs the policy loop: every invocation is recorded with args and result;
/// tool failures become step results; the trace is flagged when the budget
/// runs out before the policy finishes.
Trace execute_prompt(const UserPrompt& prompt, EnvironmentState& env, AgentPolicy& policy,
                     int budget);

/// True iff the chain's nodes appear in order as a subsequence of the traced
/// function calls (interleaved auxiliary calls are fine; the entry node is
/// ignored).
bool verify_chain_triggered(const Trace& trace, const CallChain& chain);

/// Replays an explicit (function, args) list. Byte-deterministic; throws
/// UnknownFunction before executing anything when the script names an absent
/// function.
Trace run_scripted(const std::vector<std::pair<std::string, nlohmann::json>>& script,
                   EnvironmentState& env);

/// Fixed-script policy.
class ScriptedPolicy : public AgentPolicy {
public:
    explicit ScriptedPolicy(std::vector<std::pair<std::string, nlohmann::json>> script)
        : script_(std::move(script)) {}

    AgentAction decide(const Trace& so_far, const ToolSet& ts) override;

private:
    std::vector<std::pair<std::string, nlohmann::json>> script_;
};

/// Deterministic chain-replaying policy: walks the chain in order and binds
/// each function's required parameters mechanically — path-like parameters
/// get the lexicographically first asset identifier, recipient-like ones the
/// fixed audit address, and the payload parameter the entire upstream result
/// (mirroring the broad-data handoff under audit).
class ChainReplayPolicy : public AgentPolicy {
public:
    ChainReplayPolicy(CallChain chain, const AssetCollection& assets)
        : chain_(std::move(chain)), assets_(&assets) {}

    AgentAction decide(const Trace& so_far, const ToolSet& ts) override;

private:
    CallChain chain_;
    const AssetCollection* assets_;
};

/// LLM-backed policy speaking the function-calling message schema through
/// the gateway: system prompt + tool schemas, tool-call / tool-result turns.
class LlmAgentPolicy : public AgentPolicy {
public:
    LlmAgentPolicy(Gateway& gateway, std::string backend_id, std::string user_prompt)
        : gateway_(&gateway), backend_id_(std::move(backend_id)),
          user_prompt_(std::move(user_prompt)) {}

    AgentAction decide(const Trace& so_far, const ToolSet& ts) override;

private:
    Gateway* gateway_;
    std::string backend_id_;
    std::string user_prompt_;
};

nlohmann::json trace_to_json(const Trace& trace);
Trace trace_from_json(const nlohmann::json& doc);

} // namespace agentaudit
