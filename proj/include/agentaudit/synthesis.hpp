#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "agentaudit/chains.hpp"
#include "agentaudit/gateway.hpp"
#include "agentaudit/tool_model.hpp"

namespace agentaudit {

struct AssetField {
    std::string path;          // dotted path within the asset
    std::string value;         // leaf value rendered as text
    std::string sensitivity;   // free-text tag, e.g. "PII"

    bool operator==(const AssetField& other) const {
        return path == other.path && value == other.value && sensitivity == other.sensitivity;
    }
};

struct Asset {
    std::string name;
    std::string identifier;    // external handle: a path, URL, table name…
    nlohmann::json fields = nlohmann::json::object();
    std::map<std::string, std::string> sensitivity;

    std::vector<AssetField> flat_fields() const;
};

struct AssetCollection {
    std::map<std::string, Asset> assets;

    std::set<std::string> all_field_paths() const;
    const Asset* first() const;   // lexicographically first, nullptr when empty
};

AssetCollection parse_assets(const nlohmann::json& doc);
nlohmann::json serialize_assets(const AssetCollection& assets);

/// Total partition of every asset field path into user-intent fields and
/// over-exposure candidates.
struct LabeledAssets {
    AssetCollection assets;
    std::set<std::string> intent_fields;
    std::set<std::string> candidate_fields;
};

/// Throws UnknownField when intent_spec names a path no asset carries.
LabeledAssets label_assets(const AssetCollection& assets, const std::set<std::string>& intent_spec);

struct UserPrompt {
    std::string id;            // chain id + "#" + seed
    std::string text;
    std::string chain_ref;
    std::set<std::string> intent_fields;
    std::map<std::string, std::string> entities;   // placeholder -> concrete value
    std::uint64_t seed = 0;
};

/// Turns one chain template into a concrete user prompt.
class PromptInstantiator {
public:
    virtual ~PromptInstantiator() = default;
    virtual UserPrompt instantiate(const ChainPromptTemplate& tpl, const LabeledAssets& labeled,
                                   const std::vector<FunctionSpec>& chain_functions,
                                   std::uint64_t seed) = 0;
};

/// Offline instantiator: deterministic template filling. Placeholders resolve
/// to the first lexicographically matching asset identifier (recipient-like
/// tokens get a fixed address); the text names only intent fields and closes
/// with the explicit restriction clause. Output is byte-identical across
/// seeds; the seed is recorded for bookkeeping.
class TemplateInstantiator : public PromptInstantiator {
public:
    UserPrompt instantiate(const ChainPromptTemplate& tpl, const LabeledAssets& labeled,
                           const std::vector<FunctionSpec>& chain_functions,
                           std::uint64_t seed) override;
};

/// Gateway-backed instantiator: asks the configured backend to phrase the
/// workflow, seed-salted so distinct seeds yield distinct paraphrases.
class LlmInstantiator : public PromptInstantiator {
public:
    LlmInstantiator(Gateway& gateway, std::string backend_id)
        : gateway_(&gateway), backend_id_(std::move(backend_id)) {}

    UserPrompt instantiate(const ChainPromptTemplate& tpl, const LabeledAssets& labeled,
                           const std::vector<FunctionSpec>& chain_functions,
                           std::uint64_t seed) override;

private:
    Gateway* gateway_;
    std::string backend_id_;
};

/// n prompts with distinct consecutive seeds for one chain. Throws
/// InvalidArgument for n < 1.
std::vector<UserPrompt> batch_synthesize(const ChainPromptTemplate& tpl,
                                         const LabeledAssets& labeled,
                                         const std::vector<FunctionSpec>& chain_functions,
                                         int n, PromptInstantiator& instantiator,
                                         std::uint64_t base_seed);

nlohmann::json prompts_to_json(const std::vector<UserPrompt>& prompts);
std::vector<UserPrompt> prompts_from_json(const nlohmann::json& doc);

} // namespace agentaudit
