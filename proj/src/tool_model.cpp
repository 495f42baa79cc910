#include "agentaudit/tool_model.hpp"

#include <algorithm>

#include "agentaudit/errors.hpp"

namespace agentaudit {

namespace {

using nlohmann::json;

// Rebuilds a signature with every object:Name reference expanded against the
// manifest's type table. `visiting` carries the expansion stack for cycle
// detection.
TypeSignature resolve_objects(const TypeSignature& sig,
                              const std::map<std::string, json>& type_defs,
                              std::set<std::string>& visiting) {
    using Kind = TypeSignature::Kind;
    switch (sig.kind()) {
    case Kind::Primitive:
        return sig;
    case Kind::List:
        return TypeSignature::list(resolve_objects(sig.element(), type_defs, visiting));
    case Kind::Map:
        return TypeSignature::map(resolve_objects(sig.key(), type_defs, visiting),
                                  resolve_objects(sig.value(), type_defs, visiting));
    case Kind::Optional:
        return TypeSignature::optional(resolve_objects(sig.inner(), type_defs, visiting));
    case Kind::Serialized:
        if (sig.has_hint())
            return TypeSignature::serialized(resolve_objects(sig.hint(), type_defs, visiting));
        return sig;
    case Kind::Object: {
        auto it = type_defs.find(sig.name());
        if (it == type_defs.end()) {
            // Undeclared object names stay opaque (no members), mirroring how
            // unknown primitives are preserved verbatim.
            return sig;
        }
        if (visiting.count(sig.name()))
            fail(ErrorCode::UnresolvableType, "cyclic object definition: " + sig.name());
        visiting.insert(sig.name());
        std::vector<std::pair<std::string, TypeSignature>> members;
        for (auto& [member_name, type_str] : it->second.items()) {
            if (!type_str.is_string())
                fail(ErrorCode::MalformedManifest,
                     "type member " + sig.name() + "." + member_name + " must be a type string");
            TypeSignature member = TypeSignature::parse(type_str.get<std::string>());
            members.emplace_back(member_name, resolve_objects(member, type_defs, visiting));
        }
        visiting.erase(sig.name());
        return TypeSignature::object(sig.name(), std::move(members));
    }
    }
    return sig;
}

TypeSignature parse_resolved(const std::string& text, const std::map<std::string, json>& type_defs) {
    std::set<std::string> visiting;
    return resolve_objects(TypeSignature::parse(text), type_defs, visiting);
}

const json& require_field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        fail(ErrorCode::MalformedManifest, "missing \"" + std::string(key) + "\" in " + where);
    return *it;
}

bool starts_with_any(const std::string& name, std::initializer_list<const char*> prefixes) {
    for (const char* p : prefixes) {
        if (name.rfind(p, 0) == 0) return true;
    }
    return false;
}

} // namespace

const char* to_string(Role role) {
    switch (role) {
    case Role::Source: return "source";
    case Role::Sink: return "sink";
    case Role::Plain: return "plain";
    }
    return "plain";
}

const char* to_string(Violation::Code code) {
    switch (code) {
    case Violation::Code::NoSource: return "NoSource";
    case Violation::Code::NoSink: return "NoSink";
    case Violation::Code::DuplicateFunction: return "DuplicateFunction";
    case Violation::Code::DuplicateParam: return "DuplicateParam";
    case Violation::Code::EmptyFunctionName: return "EmptyFunctionName";
    case Violation::Code::EmptyParamName: return "EmptyParamName";
    }
    return "Unknown";
}

bool ParameterSpec::operator==(const ParameterSpec& other) const {
    return name == other.name && description == other.description &&
           signature == other.signature && required == other.required;
}

bool FunctionSpec::operator==(const FunctionSpec& other) const {
    return name == other.name && tool_name == other.tool_name &&
           description == other.description && params == other.params &&
           return_signature == other.return_signature && role == other.role;
}

bool ToolSet::operator==(const ToolSet& other) const {
    return scenario == other.scenario && functions == other.functions;
}

const ParameterSpec* FunctionSpec::find_param(const std::string& param_name) const {
    for (const auto& p : params) {
        if (p.name == param_name) return &p;
    }
    return nullptr;
}

std::vector<std::string> FunctionSpec::required_param_names() const {
    std::vector<std::string> names;
    for (const auto& p : params) {
        if (p.required) names.push_back(p.name);
    }
    return names;
}

std::string FunctionSpec::signature_line() const {
    std::string line = name + "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) line += ", ";
        line += params[i].name + ": " + params[i].signature.to_string();
        if (!params[i].required) line += "?";
    }
    line += ") -> " + return_signature.to_string();
    line += " — " + description;
    return line;
}

const FunctionSpec* ToolSet::find(const std::string& name) const {
    for (const auto& fn : functions) {
        if (fn.name == name) return &fn;
    }
    return nullptr;
}

std::vector<std::string> ToolSet::function_names() const {
    std::vector<std::string> names;
    names.reserve(functions.size());
    for (const auto& fn : functions) names.push_back(fn.name);
    return names;
}

std::vector<std::string> ToolSet::sources() const {
    std::vector<std::string> names;
    for (const auto& fn : functions) {
        if (fn.role == Role::Source) names.push_back(fn.name);
    }
    return names;
}

std::vector<std::string> ToolSet::sinks() const {
    std::vector<std::string> names;
    for (const auto& fn : functions) {
        if (fn.role == Role::Sink) names.push_back(fn.name);
    }
    return names;
}

ToolSet parse_toolset(const json& manifest) {
    if (!manifest.is_object())
        fail(ErrorCode::MalformedManifest, "manifest root must be an object");

    ToolSet ts;
    ts.scenario = manifest.value("scenario", "");

    std::map<std::string, json> type_defs;
    if (manifest.contains("types")) {
        const json& types = manifest["types"];
        if (!types.is_object())
            fail(ErrorCode::MalformedManifest, "\"types\" must map names to member tables");
        for (auto& [name, members] : types.items()) {
            if (!members.is_object())
                fail(ErrorCode::MalformedManifest, "type \"" + name + "\" must be an object");
            type_defs[name] = members;
        }
    }
    // Surface cycles even for types no function references.
    for (const auto& [name, members] : type_defs) {
        std::set<std::string> visiting;
        resolve_objects(TypeSignature::object(name, {}), type_defs, visiting);
    }

    const json& functions = require_field(manifest, "functions", "manifest");
    if (!functions.is_array())
        fail(ErrorCode::MalformedManifest, "\"functions\" must be an array");

    std::set<std::string> seen;
    for (const json& fn_doc : functions) {
        FunctionSpec fn;
        fn.name = require_field(fn_doc, "name", "function").get<std::string>();
        if (seen.count(fn.name))
            fail(ErrorCode::DuplicateFunction, fn.name);
        seen.insert(fn.name);
        fn.tool_name = fn_doc.value("tool", "");
        fn.description = fn_doc.value("description", "");

        if (fn_doc.contains("params")) {
            if (!fn_doc["params"].is_array())
                fail(ErrorCode::MalformedManifest, fn.name + ": \"params\" must be an array");
            for (const json& p_doc : fn_doc["params"]) {
                ParameterSpec p;
                p.name = require_field(p_doc, "name", fn.name + " param").get<std::string>();
                p.description = p_doc.value("description", "");
                p.signature = parse_resolved(
                    require_field(p_doc, "type", fn.name + "." + p.name).get<std::string>(),
                    type_defs);
                p.required = p_doc.value("required", true);
                fn.params.push_back(std::move(p));
            }
        }

        const json& returns = require_field(fn_doc, "returns", fn.name);
        fn.return_signature = parse_resolved(
            require_field(returns, "type", fn.name + " returns").get<std::string>(), type_defs);

        ts.functions.push_back(std::move(fn));
    }
    return ts;
}

ToolSet parse_toolset_text(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        fail(ErrorCode::MalformedManifest, "manifest is not valid JSON");
    return parse_toolset(doc);
}

namespace {

// Serializes member tables for every distinct object type in the set, so the
// round-trip re-resolves identical structures.
void collect_object_defs(const TypeSignature& sig, std::map<std::string, json>& defs) {
    using Kind = TypeSignature::Kind;
    switch (sig.kind()) {
    case Kind::Object: {
        if (sig.member_count() == 0) return;
        json members = json::object();
        for (std::size_t i = 0; i < sig.member_count(); ++i) {
            members[sig.member_name(i)] = sig.member_type(i).to_string();
            collect_object_defs(sig.member_type(i), defs);
        }
        defs[sig.name()] = members;
        return;
    }
    case Kind::List:
        collect_object_defs(sig.element(), defs);
        return;
    case Kind::Map:
        collect_object_defs(sig.key(), defs);
        collect_object_defs(sig.value(), defs);
        return;
    case Kind::Optional:
        collect_object_defs(sig.inner(), defs);
        return;
    case Kind::Serialized:
        if (sig.has_hint()) collect_object_defs(sig.hint(), defs);
        return;
    case Kind::Primitive:
        return;
    }
}

} // namespace

json serialize_toolset(const ToolSet& ts) {
    json doc;
    doc["scenario"] = ts.scenario;

    std::map<std::string, json> type_defs;
    json functions = json::array();
    for (const auto& fn : ts.functions) {
        json fn_doc;
        fn_doc["name"] = fn.name;
        fn_doc["tool"] = fn.tool_name;
        fn_doc["description"] = fn.description;
        json params = json::array();
        for (const auto& p : fn.params) {
            collect_object_defs(p.signature, type_defs);
            params.push_back({{"name", p.name},
                              {"type", p.signature.to_string()},
                              {"description", p.description},
                              {"required", p.required}});
        }
        fn_doc["params"] = std::move(params);
        collect_object_defs(fn.return_signature, type_defs);
        fn_doc["returns"] = {{"type", fn.return_signature.to_string()}};
        functions.push_back(std::move(fn_doc));
    }
    doc["functions"] = std::move(functions);
    if (!type_defs.empty()) {
        json types = json::object();
        for (const auto& [name, members] : type_defs) types[name] = members;
        doc["types"] = std::move(types);
    }
    return doc;
}

ToolSet apply_role_labels(const ToolSet& ts, const std::map<std::string, Role>& labels) {
    for (const auto& [name, role] : labels) {
        if (!ts.find(name)) fail(ErrorCode::UnknownFunction, name);
    }
    ToolSet out = ts;
    for (auto& fn : out.functions) {
        auto it = labels.find(fn.name);
        if (it != labels.end()) fn.role = it->second;
    }
    return out;
}

std::map<std::string, Role> parse_roles(const json& doc) {
    std::map<std::string, Role> labels;
    if (!doc.is_object()) fail(ErrorCode::MalformedManifest, "roles file must be an object");
    if (doc.contains("sources")) {
        for (const auto& name : doc["sources"]) labels[name.get<std::string>()] = Role::Source;
    }
    if (doc.contains("sinks")) {
        for (const auto& name : doc["sinks"]) {
            std::string n = name.get<std::string>();
            if (labels.count(n) && labels[n] == Role::Source)
                fail(ErrorCode::MalformedManifest, n + " listed as both source and sink");
            labels[n] = Role::Sink;
        }
    }
    return labels;
}

std::vector<Violation> validate_toolset(const ToolSet& ts) {
    std::vector<Violation> out;
    std::set<std::string> seen;
    bool any_source = false;
    bool any_sink = false;
    for (const auto& fn : ts.functions) {
        if (fn.name.empty()) out.push_back({Violation::Code::EmptyFunctionName, fn.tool_name});
        if (seen.count(fn.name)) out.push_back({Violation::Code::DuplicateFunction, fn.name});
        seen.insert(fn.name);
        any_source |= fn.role == Role::Source;
        any_sink |= fn.role == Role::Sink;

        std::set<std::string> param_names;
        for (const auto& p : fn.params) {
            if (p.name.empty())
                out.push_back({Violation::Code::EmptyParamName, fn.name});
            if (param_names.count(p.name))
                out.push_back({Violation::Code::DuplicateParam, fn.name + "." + p.name});
            param_names.insert(p.name);
        }
    }
    if (!any_source) out.push_back({Violation::Code::NoSource, ts.scenario});
    if (!any_sink) out.push_back({Violation::Code::NoSink, ts.scenario});
    return out;
}

RoleSuggestions suggest_roles(const ToolSet& ts) {
    RoleSuggestions s;
    for (const auto& fn : ts.functions) {
        if (starts_with_any(fn.name, {"read_", "get_", "list_", "search_", "fetch_", "load_"}))
            s.sources.insert(fn.name);
        if (starts_with_any(fn.name, {"send_", "write_", "post_", "publish_", "create_", "update_"}))
            s.sinks.insert(fn.name);
    }
    return s;
}

} // namespace agentaudit
