// agentaudit — data over-exposure auditor for LLM-agent toolsets.
//
// Subcommands mirror the pipeline stages; `run` executes all six. Every
// stage reads the previous stage's artifacts from --out, so a stage can be
// re-run in isolation.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "agentaudit/errors.hpp"
#include "agentaudit/pipeline.hpp"
#include "agentaudit/report.hpp"

namespace {

using agentaudit::AuditConfig;

void add_common_options(CLI::App* cmd, AuditConfig& cfg, long& budget) {
    cmd->add_option("--manifest", cfg.manifest, "Toolset manifest (JSON)");
    cmd->add_option("--roles", cfg.roles, "Source/sink role labels (JSON)");
    cmd->add_option("--assets", cfg.assets, "User asset fixtures (JSON)");
    cmd->add_option("--intent", cfg.intent, "Intent field spec (JSON)");
    cmd->add_option("--committee", cfg.committee, "Committee config (default: mock committee)");
    cmd->add_option("--backends", cfg.backends, "Remote backend table (JSON)");
    cmd->add_option("--regulations", cfg.regulations, "Directory of regulation excerpts");
    cmd->add_option("--policy", cfg.policy, "Decision policy: scripted | llm")
        ->check(CLI::IsMember({"scripted", "llm"}));
    cmd->add_option("--agent-backend", cfg.agent_backend, "Backend id for the llm policy");
    cmd->add_option("--prompts-per-chain", cfg.prompts_per_chain, "Prompts per chain (default 5)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-chain-len", cfg.max_chain_len, "Max nodes per chain (default 6)");
    cmd->add_option("--step-budget", cfg.step_budget, "Agent step budget per prompt");
    cmd->add_option("--workers", cfg.workers, "Worker threads for judge calls");
    cmd->add_option("--seed", cfg.random_seed, "Base seed for prompt synthesis");
    cmd->add_option("--out", cfg.out_dir, "Artifact directory (default: out)");
    cmd->add_option("--token-budget", budget, "Token ceiling across backends (-1 = unlimited)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data over-exposure audit for LLM-agent toolsets"};
    app.require_subcommand(1);

    AuditConfig cfg;
    long budget = -1;
    std::string format = "text";

    CLI::App* run = app.add_subcommand("run", "Full audit: all six stages in order");
    CLI::App* build_graph = app.add_subcommand("build-graph", "Build the cross-tool call graph");
    CLI::App* list_chains = app.add_subcommand("list-chains", "Enumerate source->sink chains");
    CLI::App* synthesize = app.add_subcommand("synthesize", "Instantiate chain trigger prompts");
    CLI::App* execute = app.add_subcommand("execute", "Run prompts in the sandboxed agent runtime");
    CLI::App* detect = app.add_subcommand("detect", "Taint-track traces and judge exposure");
    CLI::App* report = app.add_subcommand("report", "Aggregate findings into the audit report");
    CLI::App* gen_assets =
        app.add_subcommand("gen-assets", "Bootstrap an assets file from the manifest");

    std::string assets_output = "assets.json";
    gen_assets->add_option("--output", assets_output, "Where to write the generated assets");

    for (CLI::App* cmd :
         {run, build_graph, list_chains, synthesize, execute, detect, report, gen_assets}) {
        add_common_options(cmd, cfg, budget);
    }
    run->add_option("--format", format, "Report rendering: text | json")
        ->check(CLI::IsMember({"text", "json"}));
    report->add_option("--format", format, "Report rendering: text | json")
        ->check(CLI::IsMember({"text", "json"}));

    CLI11_PARSE(app, argc, argv);
    if (budget >= 0) cfg.token_budget = budget;

    try {
        if (gen_assets->parsed()) {
            agentaudit::generate_assets(cfg, assets_output);
            std::cout << "assets written to " << assets_output << "\n";
        } else if (build_graph->parsed()) {
            agentaudit::stage_build_graph(cfg);
            std::cout << "graph written to " << (cfg.out_dir / "graph.json").string() << "\n";
        } else if (list_chains->parsed()) {
            agentaudit::stage_list_chains(cfg);
            std::cout << "chains written to " << (cfg.out_dir / "chains.json").string() << "\n";
        } else if (synthesize->parsed()) {
            agentaudit::stage_synthesize(cfg);
            std::cout << "prompts written to " << (cfg.out_dir / "prompts.json").string() << "\n";
        } else if (execute->parsed()) {
            agentaudit::stage_execute(cfg);
            std::cout << "traces written to " << (cfg.out_dir / "traces.json").string() << "\n";
        } else {
            agentaudit::AuditReport result = run->parsed() ? agentaudit::run_audit(cfg)
                                             : detect->parsed()
                                                 ? (agentaudit::stage_detect(cfg),
                                                    agentaudit::stage_report(cfg))
                                                 : agentaudit::stage_report(cfg);
            std::cout << agentaudit::render_report(result,
                                                   format == "json"
                                                       ? agentaudit::ReportFormat::StructuredDoc
                                                       : agentaudit::ReportFormat::HumanText);
            return result.involves_doe() ? 1 : 0;
        }
    } catch (const agentaudit::AuditError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
