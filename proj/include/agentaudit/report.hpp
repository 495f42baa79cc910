#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "agentaudit/gateway.hpp"
#include "agentaudit/taint.hpp"

namespace agentaudit {

struct PromptOutcome {
    std::string prompt_ref;
    bool triggered = false;
    bool involves_doe = false;
    bool resolved = true;
    std::size_t fields_transmitted = 0;
    std::size_t fields_over_exposed = 0;
    std::size_t fields_unresolved = 0;
    std::set<std::string> over_exposed_fields;
};

struct ChainReport {
    std::string chain_ref;
    std::vector<std::string> nodes;
    std::vector<PromptOutcome> prompts;
};

struct Aggregates {
    std::size_t total_chains = 0;
    std::size_t chains_with_doe = 0;
    std::size_t total_prompts = 0;
    std::size_t prompts_with_doe = 0;
    std::size_t prompts_triggered = 0;
    // Field counts sum over prompts involving DOE only, so the ratio reads
    // "over-exposed fields relative to the fields those prompts transmitted".
    std::size_t fields_transmitted = 0;
    std::size_t fields_over_exposed = 0;
    std::size_t fields_unresolved = 0;
    std::size_t unresolved_prompts = 0;

    bool operator==(const Aggregates& other) const = default;
};

struct AuditReport {
    std::string scenario;
    std::vector<ChainReport> per_chain;
    Aggregates aggregates;
    UsageSummary usage;

    bool involves_doe() const { return aggregates.prompts_with_doe > 0; }
};

/// Recomputes the aggregate block from the per-chain records; stored
/// aggregates must always match this.
Aggregates recompute_aggregates(const std::vector<ChainReport>& per_chain);

/// "57.07%" — round(100·x/y, 2), two decimals, half away from zero.
std::string render_percent(std::size_t x, std::size_t y);

/// "347 / 608 (57.07%)" with digit grouping.
std::string render_ratio(std::size_t x, std::size_t y);

std::string group_digits(std::size_t n);

enum class ReportFormat { HumanText, StructuredDoc };

std::string render_report(const AuditReport& report, ReportFormat format);

nlohmann::json report_to_json(const AuditReport& report);
AuditReport report_from_json(const nlohmann::json& doc);

} // namespace agentaudit
