#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "agentaudit/type_signature.hpp"

namespace agentaudit {

enum class Role { Source, Sink, Plain };

const char* to_string(Role role);

struct ParameterSpec {
    std::string name;
    std::string description;
    TypeSignature signature = TypeSignature::primitive("str");
    bool required = true;

    bool operator==(const ParameterSpec& other) const;
};

struct FunctionSpec {
    std::string name;
    std::string tool_name;
    std::string description;
    std::vector<ParameterSpec> params;
    TypeSignature return_signature = TypeSignature::primitive("str");
    Role role = Role::Plain;

    const ParameterSpec* find_param(const std::string& param_name) const;
    std::vector<std::string> required_param_names() const;
    /// One-line rendering "name(tool): desc; params ...; returns T" used in
    /// judge prompts and transcripts.
    std::string signature_line() const;

    bool operator==(const FunctionSpec& other) const;
};

/// Immutable after construction; shared freely across workers.
struct ToolSet {
    std::string scenario;
    std::vector<FunctionSpec> functions;

    const FunctionSpec* find(const std::string& name) const;
    std::vector<std::string> function_names() const;
    std::vector<std::string> sources() const;
    std::vector<std::string> sinks() const;

    bool operator==(const ToolSet& other) const;
};

struct Violation {
    enum class Code {
        NoSource,
        NoSink,
        DuplicateFunction,
        DuplicateParam,
        EmptyFunctionName,
        EmptyParamName,
    };
    Code code;
    std::string subject;   // function or parameter the violation points at

    bool operator==(const Violation& other) const {
        return code == other.code && subject == other.subject;
    }
};

const char* to_string(Violation::Code code);

/// Parses the manifest document. Throws AuditError with MalformedManifest,
/// DuplicateFunction, or UnresolvableType (cyclic object definitions).
ToolSet parse_toolset(const nlohmann::json& manifest);
ToolSet parse_toolset_text(const std::string& text);

/// Inverse of parse_toolset for valid toolsets (round-trips).
nlohmann::json serialize_toolset(const ToolSet& ts);

/// Returns a copy with roles applied; unlabeled functions stay Plain.
/// Throws UnknownFunction for labels naming absent functions.
ToolSet apply_role_labels(const ToolSet& ts, const std::map<std::string, Role>& labels);

/// Loads the roles file {"sources": [...], "sinks": [...]}.
std::map<std::string, Role> parse_roles(const nlohmann::json& doc);

/// Reports every invariant violation; empty means valid. Never mutates.
std::vector<Violation> validate_toolset(const ToolSet& ts);

/// Keyword heuristic over function names. Suggestions only; roles are always
/// applied from explicit labels.
struct RoleSuggestions {
    std::set<std::string> sources;
    std::set<std::string> sinks;
};
RoleSuggestions suggest_roles(const ToolSet& ts);

} // namespace agentaudit
