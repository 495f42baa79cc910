#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "agentaudit/gateway.hpp"
#include "agentaudit/taint.hpp"
#include "agentaudit/tool_model.hpp"

namespace agentaudit {

struct RegulationDoc {
    std::string name;
    std::string text;
};

/// Curated regulation excerpts plus the two judgment principles; grounding
/// text for the audit prompt, not the statutes themselves.
struct RegulationCorpus {
    std::vector<RegulationDoc> documents;
    std::string data_minimization;
    std::string least_privilege;

    static RegulationCorpus builtin();
    /// Loads every *.txt in the directory as one document named by its stem.
    static RegulationCorpus from_directory(const std::filesystem::path& dir);
};

struct FieldVerdict {
    std::string field;
    FieldCategory category = FieldCategory::Unresolved;
    std::string reasoning;
    std::string backend_id;

    bool operator==(const FieldVerdict& other) const {
        return field == other.field && category == other.category &&
               reasoning == other.reasoning && backend_id == other.backend_id;
    }
};

struct CommitteeMemberConfig {
    std::string id;
    std::string kind = "mock";        // mock | openai
    std::string rule = "strict";      // mock flavor: strict | signature | noisy
    std::string model;                // remote members
    std::string base_url;
    std::string api_key_env;
    double temperature = 0.0;
};

struct Committee {
    std::vector<CommitteeMemberConfig> members;
    bool strict_ties = false;

    std::size_t quorum() const { return members.size() / 2 + 1; }
};

Committee parse_committee(const nlohmann::json& doc);
Committee mock_committee();

/// What one necessity query looks like before prompt rendering.
struct JudgeQuery {
    std::string intent_text;
    std::set<std::string> intent_fields;
    FunctionSpec sink;
    std::vector<DataField> payload;
};

/// Renders the audit prompt: the regulation-grounded template with the four
/// input slots (user intent, sink metadata, intercepted payload, regulation
/// excerpts) filled. Throws InvalidArgument on an empty payload.
std::string build_audit_prompt(const std::string& intent, const FunctionSpec& sink_meta,
                               const std::vector<DataField>& payload,
                               const RegulationCorpus& regs);

/// Extracts "Field | Category | Reasoning" rows; tolerant of surrounding
/// prose, unknown categories become Unresolved, unparseable input yields an
/// empty list.
std::vector<FieldVerdict> parse_verdict_table(const std::string& response,
                                              const std::string& backend_id = "");

/// Strict-majority category over the verdicts for one field. Reasonings are
/// concatenated in backend-id order so the result is permutation-invariant.
/// Without a majority the conservative tie-break flags the field OverExposed;
/// with strict_ties it throws UnresolvedTie instead.
FieldVerdict majority_vote(const std::vector<FieldVerdict>& verdicts, bool strict_ties = false);

/// Deterministic rule-based member: emits the verdict table a regulation
/// auditor would — intent fields intended, sink-signature parameters
/// necessary, the rest over-exposed. The "noisy" rule deterministically
/// upgrades a hash-selected slice of fields to necessary.
std::string mock_member_response(const CommitteeMemberConfig& member, const JudgeQuery& query);

/// Per-query transcript record written for audit reproducibility.
struct JudgeTranscript {
    std::string prompt;
    std::vector<std::pair<std::string, std::string>> responses;   // (member, raw text)
    std::map<std::string, FieldVerdict> consensus;
    std::vector<std::string> warnings;
};

/// Queries every committee member with the audit prompt, parses each verdict
/// table, and resolves per-field categories by majority vote. Member failures
/// are tolerated while at least a quorum of members responded; fields no
/// member produced come back Unresolved.
std::map<std::string, FieldVerdict> judge_field_necessity(const JudgeQuery& query,
                                                          const RegulationCorpus& regs,
                                                          const Committee& committee,
                                                          Gateway* gateway,
                                                          JudgeTranscript* transcript = nullptr);

/// NecessityJudge backed by the committee. Verdicts are memoized per
/// (sink function, intent digest, payload-name digest) and every query is
/// appended to the transcript log when a path is configured.
class CommitteeNecessityJudge : public NecessityJudge {
public:
    CommitteeNecessityJudge(Committee committee, RegulationCorpus regs, Gateway* gateway = nullptr);

    void set_transcript_path(const std::filesystem::path& file) { transcript_path_ = file; }

    std::map<std::string, FieldCategory> assess(const FunctionSpec& sink,
                                                const std::vector<DataField>& payload,
                                                const std::set<std::string>& intent_fields,
                                                const std::string& intent_text) override;

private:
    Committee committee_;
    RegulationCorpus regs_;
    Gateway* gateway_;
    std::optional<std::filesystem::path> transcript_path_;
    std::map<std::string, std::map<std::string, FieldCategory>> memo_;
    std::mutex mu_;
};

/// Fixed-answer judge for tests and oracles.
class FixedNecessityJudge : public NecessityJudge {
public:
    explicit FixedNecessityJudge(std::set<std::string> necessary)
        : necessary_(std::move(necessary)) {}

    std::map<std::string, FieldCategory> assess(const FunctionSpec&,
                                                const std::vector<DataField>& payload,
                                                const std::set<std::string>& intent_fields,
                                                const std::string&) override {
        std::map<std::string, FieldCategory> out;
        for (const auto& field : payload) {
            if (necessary_.count(field.name))
                out[field.name] = FieldCategory::Necessary;
            else if (intent_fields.count(field.name))
                out[field.name] = FieldCategory::Intended;
            else
                out[field.name] = FieldCategory::OverExposed;
        }
        return out;
    }

private:
    std::set<std::string> necessary_;
};

} // namespace agentaudit
