#include "agentaudit/report.hpp"

#include <cmath>
#include <cstdio>

namespace agentaudit {

using nlohmann::json;

Aggregates recompute_aggregates(const std::vector<ChainReport>& per_chain) {
    Aggregates agg;
    agg.total_chains = per_chain.size();
    for (const auto& chain : per_chain) {
        bool chain_doe = false;
        for (const auto& prompt : chain.prompts) {
            ++agg.total_prompts;
            if (prompt.triggered) ++agg.prompts_triggered;
            if (!prompt.resolved) ++agg.unresolved_prompts;
            if (prompt.involves_doe) {
                chain_doe = true;
                ++agg.prompts_with_doe;
                agg.fields_transmitted += prompt.fields_transmitted;
                agg.fields_over_exposed += prompt.fields_over_exposed;
            }
            agg.fields_unresolved += prompt.fields_unresolved;
        }
        if (chain_doe) ++agg.chains_with_doe;
    }
    return agg;
}

std::string group_digits(std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    int count = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (count && count % 3 == 0) out += ',';
        out += *it;
        ++count;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string render_percent(std::size_t x, std::size_t y) {
    double percent = 0.0;
    if (y > 0) {
        percent = std::round(10000.0 * static_cast<double>(x) / static_cast<double>(y)) / 100.0;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", percent);
    return buf;
}

std::string render_ratio(std::size_t x, std::size_t y) {
    return group_digits(x) + " / " + group_digits(y) + " (" + render_percent(x, y) + ")";
}

std::string render_report(const AuditReport& report, ReportFormat format) {
    if (format == ReportFormat::StructuredDoc) {
        return report_to_json(report).dump(2) + "\n";
    }

    const Aggregates& agg = report.aggregates;
    std::string out;
    out += "DOE audit report";
    if (!report.scenario.empty()) out += " — scenario: " + report.scenario;
    out += "\n";
    out += "==================================================\n";
    out += "Call chains (source -> sink) involving DOE: " +
           render_ratio(agg.chains_with_doe, agg.total_chains) + "\n";
    out += "User prompts involving DOE:                 " +
           render_ratio(agg.prompts_with_doe, agg.total_prompts) + "\n";
    out += "Data fields over-exposed:                   " +
           render_ratio(agg.fields_over_exposed, agg.fields_transmitted) + "\n";
    out += "Trigger coverage:                           " +
           render_ratio(agg.prompts_triggered, agg.total_prompts) + "\n";
    if (agg.unresolved_prompts > 0) {
        out += "Unresolved prompts (judge unavailable):     " +
               group_digits(agg.unresolved_prompts) + "\n";
    }
    if (agg.fields_unresolved > 0) {
        out += "Fields without a verdict (review needed):   " +
               group_digits(agg.fields_unresolved) + "\n";
    }

    if (!report.per_chain.empty()) {
        out += "\nPer-chain breakdown:\n";
        for (const auto& chain : report.per_chain) {
            std::size_t doe_prompts = 0;
            std::size_t transmitted = 0;
            std::size_t over_exposed = 0;
            std::set<std::string> fields;
            for (const auto& prompt : chain.prompts) {
                if (prompt.involves_doe) {
                    ++doe_prompts;
                    transmitted += prompt.fields_transmitted;
                    over_exposed += prompt.fields_over_exposed;
                    fields.insert(prompt.over_exposed_fields.begin(),
                                  prompt.over_exposed_fields.end());
                }
            }
            std::string nodes;
            for (const auto& n : chain.nodes) {
                if (!nodes.empty()) nodes += " -> ";
                nodes += n;
            }
            out += "  " + chain.chain_ref.substr(0, 8) + "  " + nodes + "\n";
            out += "    prompts with DOE " + std::to_string(doe_prompts) + "/" +
                   std::to_string(chain.prompts.size()) + ", fields " +
                   std::to_string(over_exposed) + "/" + std::to_string(transmitted) + "\n";
            if (!fields.empty()) {
                std::string joined;
                for (const auto& f : fields) {
                    if (!joined.empty()) joined += ", ";
                    joined += f;
                }
                out += "    over-exposed fields: " + joined + "\n";
            }
        }
    }

    out += "\nUsage: " + render_usage(report.usage) + "\n";
    return out;
}

json report_to_json(const AuditReport& report) {
    json doc;
    doc["scenario"] = report.scenario;
    json chains = json::array();
    for (const auto& chain : report.per_chain) {
        json prompts = json::array();
        for (const auto& p : chain.prompts) {
            prompts.push_back({{"prompt", p.prompt_ref},
                               {"triggered", p.triggered},
                               {"involves_doe", p.involves_doe},
                               {"resolved", p.resolved},
                               {"fields_transmitted", p.fields_transmitted},
                               {"fields_over_exposed", p.fields_over_exposed},
                               {"fields_unresolved", p.fields_unresolved},
                               {"over_exposed_fields", json(p.over_exposed_fields)}});
        }
        chains.push_back({{"chain", chain.chain_ref},
                          {"nodes", chain.nodes},
                          {"prompts", std::move(prompts)}});
    }
    doc["per_chain"] = std::move(chains);
    doc["aggregates"] = {{"total_chains", report.aggregates.total_chains},
                         {"chains_with_doe", report.aggregates.chains_with_doe},
                         {"total_prompts", report.aggregates.total_prompts},
                         {"prompts_with_doe", report.aggregates.prompts_with_doe},
                         {"prompts_triggered", report.aggregates.prompts_triggered},
                         {"fields_transmitted", report.aggregates.fields_transmitted},
                         {"fields_over_exposed", report.aggregates.fields_over_exposed},
                         {"fields_unresolved", report.aggregates.fields_unresolved},
                         {"unresolved_prompts", report.aggregates.unresolved_prompts}};
    doc["usage"] = usage_to_json(report.usage);
    return doc;
}

AuditReport report_from_json(const json& doc) {
    AuditReport report;
    report.scenario = doc.value("scenario", "");
    for (const auto& chain_doc : doc["per_chain"]) {
        ChainReport chain;
        chain.chain_ref = chain_doc.value("chain", "");
        for (const auto& n : chain_doc["nodes"]) chain.nodes.push_back(n.get<std::string>());
        for (const auto& p : chain_doc["prompts"]) {
            PromptOutcome outcome;
            outcome.prompt_ref = p.value("prompt", "");
            outcome.triggered = p.value("triggered", false);
            outcome.involves_doe = p.value("involves_doe", false);
            outcome.resolved = p.value("resolved", true);
            outcome.fields_transmitted = p.value("fields_transmitted", std::size_t{0});
            outcome.fields_over_exposed = p.value("fields_over_exposed", std::size_t{0});
            outcome.fields_unresolved = p.value("fields_unresolved", std::size_t{0});
            for (const auto& f : p["over_exposed_fields"])
                outcome.over_exposed_fields.insert(f.get<std::string>());
            chain.prompts.push_back(std::move(outcome));
        }
        report.per_chain.push_back(std::move(chain));
    }
    const json& agg = doc["aggregates"];
    report.aggregates.total_chains = agg.value("total_chains", std::size_t{0});
    report.aggregates.chains_with_doe = agg.value("chains_with_doe", std::size_t{0});
    report.aggregates.total_prompts = agg.value("total_prompts", std::size_t{0});
    report.aggregates.prompts_with_doe = agg.value("prompts_with_doe", std::size_t{0});
    report.aggregates.prompts_triggered = agg.value("prompts_triggered", std::size_t{0});
    report.aggregates.fields_transmitted = agg.value("fields_transmitted", std::size_t{0});
    report.aggregates.fields_over_exposed = agg.value("fields_over_exposed", std::size_t{0});
    report.aggregates.fields_unresolved = agg.value("fields_unresolved", std::size_t{0});
    report.aggregates.unresolved_prompts = agg.value("unresolved_prompts", std::size_t{0});
    if (doc.contains("usage")) report.usage = usage_from_json(doc["usage"]);
    return report;
}

} // namespace agentaudit
