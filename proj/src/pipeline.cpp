#include "agentaudit/pipeline.hpp"

#include <fstream>
#include <functional>
#include <iterator>
#include <mutex>
#include <thread>

#include "agentaudit/chains.hpp"
#include "agentaudit/errors.hpp"
#include "agentaudit/fcg.hpp"
#include "agentaudit/harness.hpp"
#include "agentaudit/judge.hpp"
#include "agentaudit/synthesis.hpp"
#include "agentaudit/taint.hpp"

namespace agentaudit {

using nlohmann::json;

namespace {

json load_json_file(const std::filesystem::path& path, ErrorCode missing_code,
                    const std::string& what) {
    std::ifstream in(path);
    if (!in) fail(missing_code, what + " not found at " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::MalformedManifest, what + " is not valid JSON");
    return doc;
}

json load_input(const std::filesystem::path& path, const std::string& what) {
    return load_json_file(path, ErrorCode::InvalidArgument, what);
}

json load_artifact(const AuditConfig& cfg, const char* name) {
    return load_json_file(cfg.out_dir / name, ErrorCode::MissingUpstreamArtifact, name);
}

void write_artifact(const AuditConfig& cfg, const char* name, const json& doc) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir / name);
    out << doc.dump(2) << "\n";
}

ToolSet load_labeled_toolset(const AuditConfig& cfg) {
    ToolSet ts = parse_toolset(load_input(cfg.manifest, "manifest"));
    if (!cfg.roles.empty()) {
        ts = apply_role_labels(ts, parse_roles(load_input(cfg.roles, "roles file")));
    }
    return ts;
}

std::set<std::string> load_intent_spec(const AuditConfig& cfg) {
    json doc = load_input(cfg.intent, "intent spec");
    std::set<std::string> intent;
    const json& list = doc.is_array() ? doc : doc.at("intent");
    for (const auto& field : list) intent.insert(field.get<std::string>());
    return intent;
}

Committee load_committee(const AuditConfig& cfg) {
    if (cfg.committee.empty()) return mock_committee();
    return parse_committee(load_input(cfg.committee, "committee config"));
}

RegulationCorpus load_regulations(const AuditConfig& cfg) {
    if (cfg.regulations.empty() || !std::filesystem::is_directory(cfg.regulations))
        return RegulationCorpus::builtin();
    return RegulationCorpus::from_directory(cfg.regulations);
}

// Cumulative cross-stage usage ledger; staged and monolithic runs both funnel
// every stage's local tally through this file.
UsageSummary load_usage(const AuditConfig& cfg) {
    std::ifstream in(cfg.out_dir / artifacts::kUsage);
    if (!in) return {};
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) return {};
    return usage_from_json(doc);
}

void merge_usage(const AuditConfig& cfg, const UsageSummary& delta) {
    UsageSummary total = load_usage(cfg);
    total.grand_total += delta.grand_total;
    for (const auto& [stage, tokens] : delta.per_stage) total.per_stage[stage] += tokens;
    for (const auto& [backend, tokens] : delta.per_backend) total.per_backend[backend] += tokens;
    total.chains_verified += delta.chains_verified;
    total.cost_per_chain_millions =
        total.chains_verified > 0
            ? static_cast<double>(total.grand_total) / total.chains_verified / 1e6
            : 0.0;
    write_artifact(cfg, artifacts::kUsage, usage_to_json(total));
}

// One gateway per stage; the persisted cache keeps re-runs free and the
// budget accounts for tokens earlier stages already spent.
void configure_gateway(Gateway& gateway, const AuditConfig& cfg) {
    gateway.register_backend(std::make_shared<MockBackend>("mock"));
    if (!cfg.backends.empty() && std::filesystem::exists(cfg.backends)) {
        json doc = load_input(cfg.backends, "backend config");
        for (const auto& b : doc.value("backends", json::array())) {
            HttpBackendConfig hc;
            hc.id = b.value("id", "");
            hc.base_url = b.value("base_url", "");
            hc.model = b.value("model", "");
            hc.api_key_env = b.value("api_key_env", "");
            hc.timeout_seconds = b.value("timeout_seconds", 60);
            if (!hc.id.empty()) gateway.register_backend(std::make_shared<HttpBackend>(hc));
        }
    }
    if (cfg.token_budget) {
        long spent = load_usage(cfg).grand_total;
        gateway.set_token_budget(std::max(0L, *cfg.token_budget - spent));
    }
    if (cfg.workers > 1) gateway.set_max_in_flight(cfg.workers);
    gateway.set_cache_dir(cfg.out_dir / "cache");
}

void register_committee_backends(Gateway& gateway, const Committee& committee) {
    for (const auto& member : committee.members) {
        if (member.kind == "mock" || gateway.has_backend(member.id)) continue;
        HttpBackendConfig hc;
        hc.id = member.id;
        hc.base_url = member.base_url;
        hc.model = member.model;
        hc.api_key_env = member.api_key_env;
        gateway.register_backend(std::make_shared<HttpBackend>(hc));
    }
}

struct ChainRecord {
    CallChain chain;
    std::string id;
    std::string source;
    std::string sink;
    std::vector<std::string> steps;
};

std::vector<ChainRecord> load_chain_records(const AuditConfig& cfg) {
    json doc = load_artifact(cfg, artifacts::kChains);
    std::vector<ChainRecord> records;
    for (const auto& entry : doc["chains"]) {
        ChainRecord record;
        record.id = entry.value("id", "");
        record.source = entry.value("source", "");
        record.sink = entry.value("sink", "");
        for (const auto& n : entry["nodes"]) record.chain.nodes.push_back(n.get<std::string>());
        for (const auto& e : entry["edges"]) {
            CallEdge edge;
            edge.src = e.value("src", "");
            edge.tgt = e.value("tgt", "");
            edge.action = e.value("action", "");
            record.chain.edges.push_back(std::move(edge));
        }
        for (const auto& s : entry["steps"]) record.steps.push_back(s.get<std::string>());
        records.push_back(std::move(record));
    }
    return records;
}

[[noreturn]] void rethrow_tagged(const char* stage, const AuditError& e) {
    throw AuditError(e.code(), std::string("[") + stage + "] " + e.what());
}

// Runs body(i) for i in [0, count) across `workers` threads. Results must be
// written to pre-sized slots so output order never depends on scheduling; the
// first exception wins and is rethrown on the caller thread.
void parallel_for_index(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= count || first_error) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    int n = std::min<int>(workers, static_cast<int>(count));
    threads.reserve(n);
    for (int t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

void stage_build_graph(const AuditConfig& cfg) {
    // First stage of a fresh audit: clear the cumulative ledgers so re-runs
    // start from zero (the judge cache and response cache persist on purpose).
    std::error_code ignored;
    std::filesystem::remove(cfg.out_dir / artifacts::kUsage, ignored);
    std::filesystem::remove(cfg.out_dir / artifacts::kJudgeTranscript, ignored);

    ToolSet ts = load_labeled_toolset(cfg);
    for (const auto& violation : validate_toolset(ts)) {
        if (violation.code == Violation::Code::NoSource ||
            violation.code == Violation::Code::NoSink)
            continue;   // surfaced by chain retrieval when it matters
        fail(ErrorCode::InvalidArgument, std::string("manifest violation ") +
                                             to_string(violation.code) + ": " + violation.subject);
    }

    std::filesystem::create_directories(cfg.out_dir);
    ValidationCache cache(cfg.out_dir / artifacts::kJudgeCache);
    KeywordOverlapJudge mock_judge;
    HeuristicExtractor extractor;
    FcgBuildResult result = build_fcg(ts, mock_judge, extractor, &cache, cfg.workers);
    write_artifact(cfg, artifacts::kGraph, fcg_to_json(result));
}

void stage_list_chains(const AuditConfig& cfg) {
    FcgBuildResult fcg = fcg_from_json(load_artifact(cfg, artifacts::kGraph));
    ToolSet ts = load_labeled_toolset(cfg);
    auto chains = retrieve_all_chains(fcg.graph, ts, cfg.max_chain_len);
    write_artifact(cfg, artifacts::kChains, chains_to_json(chains));
}

void stage_synthesize(const AuditConfig& cfg) {
    std::vector<ChainRecord> records = load_chain_records(cfg);
    ToolSet ts = load_labeled_toolset(cfg);
    AssetCollection assets = parse_assets(load_input(cfg.assets, "assets file"));
    LabeledAssets labeled = label_assets(assets, load_intent_spec(cfg));

    Gateway gateway;
    configure_gateway(gateway, cfg);
    TemplateInstantiator template_instantiator;
    LlmInstantiator llm_instantiator(gateway, cfg.agent_backend);
    PromptInstantiator& instantiator =
        cfg.policy == "llm" ? static_cast<PromptInstantiator&>(llm_instantiator)
                            : static_cast<PromptInstantiator&>(template_instantiator);

    std::vector<std::vector<UserPrompt>> per_chain(records.size());
    parallel_for_index(records.size(), cfg.workers, [&](std::size_t i) {
        const ChainRecord& record = records[i];
        ChainPromptTemplate tpl = build_chain_template(record.chain);
        std::vector<FunctionSpec> chain_functions;
        for (const auto& node : record.chain.nodes) {
            const FunctionSpec* fn = ts.find(node);
            if (!fn) fail(ErrorCode::UnknownFunction, node + " (chain node)");
            chain_functions.push_back(*fn);
        }
        per_chain[i] = batch_synthesize(tpl, labeled, chain_functions, cfg.prompts_per_chain,
                                        instantiator, cfg.random_seed);
    });

    std::vector<UserPrompt> all_prompts;
    for (auto& prompts : per_chain) {
        all_prompts.insert(all_prompts.end(), std::make_move_iterator(prompts.begin()),
                           std::make_move_iterator(prompts.end()));
    }
    write_artifact(cfg, artifacts::kPrompts, prompts_to_json(all_prompts));
    merge_usage(cfg, report_usage(gateway.usage()));
}

void stage_execute(const AuditConfig& cfg) {
    std::vector<ChainRecord> records = load_chain_records(cfg);
    std::vector<UserPrompt> prompts = prompts_from_json(load_artifact(cfg, artifacts::kPrompts));
    ToolSet ts = load_labeled_toolset(cfg);
    AssetCollection assets = parse_assets(load_input(cfg.assets, "assets file"));

    std::map<std::string, const ChainRecord*> by_id;
    for (const auto& record : records) by_id[record.id] = &record;

    Gateway gateway;
    configure_gateway(gateway, cfg);

    std::vector<json> trace_docs(prompts.size());
    parallel_for_index(prompts.size(), cfg.workers, [&](std::size_t i) {
        const UserPrompt& prompt = prompts[i];
        auto it = by_id.find(prompt.chain_ref);
        if (it == by_id.end())
            fail(ErrorCode::MissingUpstreamArtifact,
                 "prompt " + prompt.id + " references unknown chain " + prompt.chain_ref);
        const ChainRecord& record = *it->second;

        EnvironmentState env(ts, assets);
        Trace trace;
        if (cfg.policy == "llm") {
            LlmAgentPolicy policy(gateway, cfg.agent_backend, prompt.text);
            trace = execute_prompt(prompt, env, policy, cfg.step_budget);
        } else {
            ChainReplayPolicy policy(record.chain, assets);
            trace = execute_prompt(prompt, env, policy, cfg.step_budget);
        }

        json doc = trace_to_json(trace);
        doc["chain"] = record.id;
        doc["triggered"] = verify_chain_triggered(trace, record.chain);
        trace_docs[i] = std::move(doc);
    });

    json traces = json::array();
    for (auto& doc : trace_docs) traces.push_back(std::move(doc));
    write_artifact(cfg, artifacts::kTraces, json{{"traces", std::move(traces)}});
    merge_usage(cfg, report_usage(gateway.usage()));
}

void stage_detect(const AuditConfig& cfg) {
    json traces_doc = load_artifact(cfg, artifacts::kTraces);
    ToolSet ts = load_labeled_toolset(cfg);
    std::set<std::string> intent = load_intent_spec(cfg);

    std::map<std::string, std::string> prompt_texts;
    for (const auto& p : load_artifact(cfg, artifacts::kPrompts)["prompts"]) {
        prompt_texts[p.value("id", "")] = p.value("text", "");
    }

    Committee committee = load_committee(cfg);
    Gateway gateway;
    configure_gateway(gateway, cfg);
    register_committee_backends(gateway, committee);
    CommitteeNecessityJudge judge(committee, load_regulations(cfg), &gateway);
    judge.set_transcript_path(cfg.out_dir / artifacts::kJudgeTranscript);

    const json& trace_list = traces_doc["traces"];
    std::vector<json> finding_docs(trace_list.size());
    std::mutex chains_mu;
    std::set<std::string> chains_with_resolved_finding;
    parallel_for_index(trace_list.size(), cfg.workers, [&](std::size_t i) {
        const json& trace_doc = trace_list[i];
        Trace trace = trace_from_json(trace_doc);
        std::vector<DataField> d_total = collect_d_total(trace);
        std::string intent_text;
        auto text_it = prompt_texts.find(trace.prompt_ref);
        if (text_it != prompt_texts.end()) intent_text = text_it->second;

        DOEFinding finding =
            analyze_data_flow(trace, d_total, intent, judge, ts, default_phi, intent_text);
        finding.chain_ref = trace_doc.value("chain", "");
        if (finding.resolved && finding.has_sink_step) {
            std::lock_guard<std::mutex> lock(chains_mu);
            chains_with_resolved_finding.insert(finding.chain_ref);
        }
        finding_docs[i] = finding_to_json(finding);
    });
    json findings = json::array();
    for (auto& doc : finding_docs) findings.push_back(std::move(doc));
    for (std::size_t i = 0; i < chains_with_resolved_finding.size(); ++i)
        gateway.usage().record_chain_verified();

    write_artifact(cfg, artifacts::kFindings, json{{"findings", std::move(findings)}});
    merge_usage(cfg, report_usage(gateway.usage()));
}

AuditReport stage_report(const AuditConfig& cfg) {
    std::vector<ChainRecord> records = load_chain_records(cfg);
    json traces_doc = load_artifact(cfg, artifacts::kTraces);
    json findings_doc = load_artifact(cfg, artifacts::kFindings);
    ToolSet ts = load_labeled_toolset(cfg);

    std::map<std::string, bool> triggered;
    for (const auto& t : traces_doc["traces"])
        triggered[t.value("prompt", "")] = t.value("triggered", false);

    std::map<std::string, DOEFinding> findings;
    std::map<std::string, std::vector<std::string>> prompts_by_chain;
    std::vector<std::string> prompt_order;
    for (const auto& f : findings_doc["findings"]) {
        DOEFinding finding = finding_from_json(f);
        prompts_by_chain[finding.chain_ref].push_back(finding.prompt_ref);
        findings[finding.prompt_ref] = std::move(finding);
    }

    AuditReport report;
    report.scenario = ts.scenario;
    for (const auto& record : records) {
        ChainReport chain_report;
        chain_report.chain_ref = record.id;
        chain_report.nodes = record.chain.nodes;
        for (const auto& prompt_ref : prompts_by_chain[record.id]) {
            const DOEFinding& finding = findings[prompt_ref];
            PromptOutcome outcome;
            outcome.prompt_ref = prompt_ref;
            outcome.triggered = triggered.count(prompt_ref) ? triggered[prompt_ref] : false;
            outcome.involves_doe = finding.involves_doe();
            outcome.resolved = finding.resolved;
            outcome.fields_transmitted = finding.exposure.d_trans.size();
            outcome.fields_over_exposed = finding.exposure.d_oe.size();
            outcome.fields_unresolved = finding.unresolved_fields.size();
            outcome.over_exposed_fields = finding.exposure.d_oe;
            chain_report.prompts.push_back(std::move(outcome));
        }
        report.per_chain.push_back(std::move(chain_report));
    }
    report.aggregates = recompute_aggregates(report.per_chain);
    report.usage = load_usage(cfg);

    write_artifact(cfg, artifacts::kReportJson, report_to_json(report));
    std::ofstream text(cfg.out_dir / artifacts::kReportText);
    text << render_report(report, ReportFormat::HumanText);
    return report;
}

void generate_assets(const AuditConfig& cfg, const std::filesystem::path& output) {
    ToolSet ts = load_labeled_toolset(cfg);

    json assets = json::object();
    for (const auto& fn : ts.functions) {
        if (fn.role != Role::Source) continue;
        json fields = json::object();
        const TypeSignature& ret = fn.return_signature;
        if (ret.kind() == TypeSignature::Kind::Object && ret.member_count() > 0) {
            for (std::size_t i = 0; i < ret.member_count(); ++i) {
                fields[ret.member_name(i)] = "sample-" + ret.member_name(i) + "-1";
            }
        } else {
            fields["content"] = "sample-content-for-" + fn.name;
        }
        assets[fn.name + "_data"] = {{"identifier", "./" + fn.name + ".data"},
                                     {"fields", std::move(fields)}};
    }
    json doc = {{"assets", std::move(assets)}};

    if (cfg.agent_backend != "mock") {
        Gateway gateway;
        configure_gateway(gateway, cfg);
        CompletionRequest req;
        req.backend_id = cfg.agent_backend;
        req.stage = "synthesis";
        req.messages = {
            {"system",
             "Populate this asset skeleton with realistic but synthetic values (mixed personal "
             "and business data). Answer with the completed JSON document only."},
            {"user", doc.dump(2)}};
        CompletionResponse resp = gateway.complete(req);
        if (resp.text) {
            json filled = json::parse(*resp.text, nullptr, false);
            if (filled.is_object() && filled.contains("assets")) doc = std::move(filled);
        }
    }

    std::filesystem::create_directories(output.parent_path().empty() ? "."
                                                                     : output.parent_path());
    std::ofstream out(output);
    out << doc.dump(2) << "\n";
}

AuditReport run_audit(const AuditConfig& cfg) {
    const char* stage = "build-graph";
    try {
        stage_build_graph(cfg);
        stage = "list-chains";
        stage_list_chains(cfg);
        stage = "synthesize";
        stage_synthesize(cfg);
        stage = "execute";
        stage_execute(cfg);
        stage = "detect";
        stage_detect(cfg);
        stage = "report";
        return stage_report(cfg);
    } catch (const AuditError& e) {
        // Flush whatever partial report the finished stages support.
        try {
            stage_report(cfg);
        } catch (const AuditError&) {
        }
        rethrow_tagged(stage, e);
    }
}

} // namespace agentaudit
