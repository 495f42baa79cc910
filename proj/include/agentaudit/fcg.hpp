#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "agentaudit/compat.hpp"
#include "agentaudit/gateway.hpp"
#include "agentaudit/tool_model.hpp"

namespace agentaudit {

enum class Validation { Pending, Confirmed, Rejected };
const char* to_string(Validation v);
Validation validation_from_string(const std::string& s);

/// Statically compatible (upstream return → downstream parameter) match.
/// Self-pairs are kept; they never survive into acyclic chains.
struct FunctionPair {
    std::string upstream;
    std::string downstream;
    std::string matched_param;
    CompatKind compat = CompatKind::Equivalence;
    Validation validated = Validation::Pending;

    std::string key() const { return upstream + "->" + downstream + "#" + matched_param; }

    bool operator==(const FunctionPair& other) const {
        return upstream == other.upstream && downstream == other.downstream &&
               matched_param == other.matched_param && compat == other.compat &&
               validated == other.validated;
    }
};

struct VerbObject {
    std::string verb;
    std::string object;

    bool operator==(const VerbObject& other) const {
        return verb == other.verb && object == other.object;
    }
};

struct CallEdge {
    std::string src;
    std::string tgt;
    std::string action;
    VerbObject upstream_vo;     // verb1 / object1
    VerbObject downstream_vo;   // verb2 / object2
    std::optional<CompatKind> compat;
    Validation verdict = Validation::Confirmed;

    bool operator==(const CallEdge& other) const {
        return src == other.src && tgt == other.tgt && action == other.action;
    }
};

/// Directed graph over function nodes plus the virtual entry node. Adjacency
/// carries an entry (possibly empty) for every node; lists are sorted by
/// (target, action) so traversal order is reproducible.
struct CallGraph {
    static constexpr const char* kEntryNode = "entry";

    std::set<std::string> all_nodes;
    std::map<std::string, std::vector<CallEdge>> adjacency;
    std::string entry_node = kEntryNode;

    bool has_node(const std::string& id) const { return all_nodes.count(id) > 0; }
    std::size_t edge_count() const;
};

/// Stage 1: every ordered (upstream, downstream, parameter) triple whose
/// types match one of the dependency rules, in lexicographic order, all
/// Pending.
std::vector<FunctionPair> extract_compatible_pairs(const ToolSet& ts);

/// Stage 2 contract: does the upstream output logically serve as this input?
class SemanticJudge {
public:
    virtual ~SemanticJudge() = default;
    virtual std::string id() const = 0;
    virtual bool logically_relevant(const FunctionSpec& upstream, const FunctionSpec& downstream,
                                    const std::string& matched_param) = 0;
};

/// Deterministic offline judge: confirms a pair when the upstream description
/// and the downstream description plus parameter names share a content word
/// (stopwords and common tool verbs removed, trailing plural-s folded).
class KeywordOverlapJudge : public SemanticJudge {
public:
    std::string id() const override { return "mock-keyword-overlap"; }
    bool logically_relevant(const FunctionSpec& upstream, const FunctionSpec& downstream,
                            const std::string& matched_param) override;
};

/// Gateway-backed judge asking the configured backend the Stage-2 question.
class LlmSemanticJudge : public SemanticJudge {
public:
    LlmSemanticJudge(Gateway& gateway, std::string backend_id)
        : gateway_(&gateway), backend_id_(std::move(backend_id)) {}

    std::string id() const override { return backend_id_; }
    bool logically_relevant(const FunctionSpec& upstream, const FunctionSpec& downstream,
                            const std::string& matched_param) override;

private:
    Gateway* gateway_;
    std::string backend_id_;
};

/// Applies the judge to a pending pair. On judge failure the pair stays
/// Pending and the error propagates.
FunctionPair validate_dependency(FunctionPair pair, const FunctionSpec& upstream,
                                 const FunctionSpec& downstream, SemanticJudge& judge);

/// Verdict cache keyed by (upstream, downstream, parameter); persisted as
/// append-only JSONL records so repeated audits skip judge calls.
class ValidationCache {
public:
    ValidationCache() = default;
    explicit ValidationCache(const std::filesystem::path& file);

    std::optional<bool> lookup(const FunctionPair& pair) const;
    void store(const FunctionPair& pair, bool confirmed, const std::string& backend_id);

private:
    std::map<std::string, bool> entries_;
    std::optional<std::filesystem::path> file_;
};

/// Core verb (action) and object (target) of a description. Offline
/// heuristic: first token is the verb; the object is the remainder cut at the
/// first linking preposition, with "X of Y" reordered to "Y X" (articles
/// dropped) and a leading a/an normalized to "the". Empty remainders fall
/// back to the supplied name. Throws EmptyDescription.
VerbObject extract_verb_object(const std::string& description, const std::string& fallback_object);

class VerbObjectExtractor {
public:
    virtual ~VerbObjectExtractor() = default;
    virtual VerbObject extract(const FunctionSpec& fn) = 0;
};

class HeuristicExtractor : public VerbObjectExtractor {
public:
    VerbObject extract(const FunctionSpec& fn) override {
        return extract_verb_object(fn.description, fn.name);
    }
};

class LlmExtractor : public VerbObjectExtractor {
public:
    LlmExtractor(Gateway& gateway, std::string backend_id)
        : gateway_(&gateway), backend_id_(std::move(backend_id)) {}
    VerbObject extract(const FunctionSpec& fn) override;

private:
    Gateway* gateway_;
    std::string backend_id_;
};

/// Fills the call-edge template with the two verb/object pairs. The action is
/// exactly:
///   "Based on the {object1} {verb1} by the previous step, the next step is
///    to {verb2} {object2} based on the {object1}."
CallEdge generate_call_edge(const FunctionPair& pair, const VerbObject& upstream_vo,
                            const VerbObject& downstream_vo);

/// Assembles the graph: nodes = funcs ∪ {entry}; edges whose src is neither a
/// node nor entry, or whose tgt is not a node, are skipped; every listed
/// source gets an entry edge with action "start". Exact duplicate edges
/// collapse, so recombining a graph's own content is idempotent.
CallGraph combine_call_graph(const std::vector<std::string>& funcs,
                             const std::vector<CallEdge>& edges,
                             const std::vector<std::string>& sources = {});

struct FcgBuildResult {
    CallGraph graph;
    std::vector<FunctionPair> pairs;                  // with final verdicts
    std::map<std::string, VerbObject> verb_objects;   // per function
};

/// Full pipeline: pair extraction → validation (cached, optionally across
/// `workers` threads) → verb/object extraction → edge generation → combine.
FcgBuildResult build_fcg(const ToolSet& ts, SemanticJudge& judge, VerbObjectExtractor& extractor,
                         ValidationCache* cache = nullptr, int workers = 1);

nlohmann::json fcg_to_json(const FcgBuildResult& result);
FcgBuildResult fcg_from_json(const nlohmann::json& doc);

} // namespace agentaudit
