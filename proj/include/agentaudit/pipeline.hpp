#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "agentaudit/report.hpp"

namespace agentaudit {

/// Everything an audit run needs. Paths resolve at stage start; stages read
/// the previous stage's artifacts from out_dir, so any stage is re-runnable
/// on its own.
struct AuditConfig {
    std::filesystem::path manifest;
    std::filesystem::path roles;
    std::filesystem::path assets;
    std::filesystem::path intent;
    std::filesystem::path committee;       // empty -> deterministic mock committee
    std::filesystem::path backends;        // optional remote backend table
    std::filesystem::path regulations;     // optional directory of excerpt files
    std::string policy = "scripted";       // scripted | llm
    std::string agent_backend = "mock";    // backend id for the llm policy + instantiator
    int prompts_per_chain = 5;
    std::size_t max_chain_len = 6;
    int step_budget = 16;
    int workers = 1;
    std::optional<long> token_budget;
    std::filesystem::path out_dir = "out";
    std::uint64_t random_seed = 1;
};

/// Artifact names under out_dir.
namespace artifacts {
inline constexpr const char* kGraph = "graph.json";
inline constexpr const char* kChains = "chains.json";
inline constexpr const char* kPrompts = "prompts.json";
inline constexpr const char* kTraces = "traces.json";
inline constexpr const char* kFindings = "findings.json";
inline constexpr const char* kUsage = "usage.json";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kJudgeTranscript = "judge_transcript.jsonl";
inline constexpr const char* kJudgeCache = "judge_cache.jsonl";
} // namespace artifacts

/// Pipeline stages; each reads its inputs/artifacts, writes its artifact, and
/// throws MissingUpstreamArtifact when run out of order.
void stage_build_graph(const AuditConfig& cfg);
void stage_list_chains(const AuditConfig& cfg);
void stage_synthesize(const AuditConfig& cfg);
void stage_execute(const AuditConfig& cfg);
void stage_detect(const AuditConfig& cfg);
AuditReport stage_report(const AuditConfig& cfg);

/// The six stages in order. On a stage failure the partial report is still
/// flushed before the error propagates, tagged with the failing stage.
AuditReport run_audit(const AuditConfig& cfg);

/// Writes a starter assets file derived from the manifest: every source
/// function contributes an asset skeleton (object return members become
/// fields with placeholder values). When a non-mock backend is configured the
/// skeleton is handed to it for realistic value population; unusable replies
/// fall back to the skeleton. Audits normally run on hand-authored assets —
/// this is a bootstrap convenience.
void generate_assets(const AuditConfig& cfg, const std::filesystem::path& output);

} // namespace agentaudit
