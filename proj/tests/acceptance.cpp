// Acceptance suite: one criterion per check, one PASS/FAIL line each, with
// the stated tolerances and time limits pinned in code. Exits non-zero if
// any criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "agentaudit/chains.hpp"
#include "agentaudit/errors.hpp"
#include "agentaudit/fcg.hpp"
#include "agentaudit/judge.hpp"
#include "agentaudit/pipeline.hpp"
#include "agentaudit/report.hpp"
#include "agentaudit/synthesis.hpp"
#include "agentaudit/taint.hpp"

using namespace agentaudit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure(message);
}

template <typename T>
void require_eq(const T& got, const T& want, const std::string& what) {
    if (!(got == want)) {
        std::ostringstream msg;
        msg << what << ": got " << got << ", want " << want;
        throw CheckFailure(msg.str());
    }
}

fs::path fixture_dir() { return fs::path(FIXTURE_DIR) / "motivating"; }

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "agentaudit_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

AuditConfig motivating_config(const std::string& run_name) {
    AuditConfig cfg;
    cfg.manifest = fixture_dir() / "manifest.json";
    cfg.roles = fixture_dir() / "roles.json";
    cfg.assets = fixture_dir() / "assets.json";
    cfg.intent = fixture_dir() / "intent.json";
    cfg.out_dir = scratch_dir(run_name);
    return cfg;
}

// Exposure sets collected by criteria 5 and 6 for the invariant sweep (8).
std::vector<ExposureSets> g_collected_exposures;

// ---------------------------------------------------------------------------
// Criterion 1

void criterion_type_rules() {
    auto t = [](const char* text) { return TypeSignature::parse(text); };
    using K = CompatKind;
    const std::optional<CompatKind> none = std::nullopt;

    // The three published rule examples.
    require(types_compatible(t("str"), t("str")) == K::Equivalence, "str=str");
    require(types_compatible(t("str"), t("list[str]")) == K::SubsetReturnInInput,
            "str in elem(list[str])");
    require(types_compatible(t("jsonstr"), t("map[str,str]")) == K::Conversion,
            "jsonstr -> map");

    TypeSignature rec_s = TypeSignature::object("Rec", {{"a", t("str")}});
    TypeSignature rec_i = TypeSignature::object("Rec", {{"a", t("int")}});
    TypeSignature rec_ls = TypeSignature::object("Rec", {{"a", t("list[str]")}});
    TypeSignature rec_si = TypeSignature::object("Rec", {{"a", t("str")}, {"b", t("int")}});

    struct Case {
        TypeSignature ret;
        TypeSignature inp;
        std::optional<CompatKind> want;
    };
    const Case cases[] = {
        // equivalence
        {t("int"), t("int"), K::Equivalence},
        {t("float"), t("float"), K::Equivalence},
        {t("bool"), t("bool"), K::Equivalence},
        {t("list[str]"), t("list[str]"), K::Equivalence},
        {t("map[str,int]"), t("map[str,int]"), K::Equivalence},
        {t("optional[str]"), t("optional[str]"), K::Equivalence},
        {t("jsonstr"), t("jsonstr"), K::Equivalence},
        {rec_s, rec_s, K::Equivalence},
        {t("customtype"), t("customtype"), K::Equivalence},
        {t("list[map[str,int]]"), t("list[map[str,int]]"), K::Equivalence},
        // subset: return inside input
        {t("int"), t("list[int]"), K::SubsetReturnInInput},
        {t("str"), t("list[list[str]]"), K::SubsetReturnInInput},
        {t("str"), t("map[int,str]"), K::SubsetReturnInInput},
        {t("int"), t("map[str,int]"), K::SubsetReturnInInput},
        {t("str"), t("optional[str]"), K::SubsetReturnInInput},
        {t("list[str]"), t("list[list[str]]"), K::SubsetReturnInInput},
        {t("str"), rec_s, K::SubsetReturnInInput},
        {t("int"), rec_i, K::SubsetReturnInInput},
        {t("str"), rec_ls, K::SubsetReturnInInput},
        {t("map[str,str]"), t("list[map[str,str]]"), K::SubsetReturnInInput},
        {t("jsonstr"), t("list[jsonstr]"), K::SubsetReturnInInput},
        {t("str"), t("list[optional[str]]"), K::SubsetReturnInInput},
        {t("bool"), t("map[str,bool]"), K::SubsetReturnInInput},
        {t("str"), t("map[str,map[str,str]]"), K::SubsetReturnInInput},
        // subset: input inside return
        {t("list[str]"), t("str"), K::SubsetInputInReturn},
        {t("map[str,int]"), t("int"), K::SubsetInputInReturn},
        {rec_s, t("str"), K::SubsetInputInReturn},
        {t("list[list[int]]"), t("int"), K::SubsetInputInReturn},
        {TypeSignature::list(rec_s), t("str"), K::SubsetInputInReturn},
        {t("optional[int]"), t("int"), K::SubsetInputInReturn},
        {t("list[jsonstr]"), t("jsonstr"), K::SubsetInputInReturn},
        {TypeSignature::map(t("str"), rec_i), t("int"), K::SubsetInputInReturn},
        {rec_si, t("int"), K::SubsetInputInReturn},
        {t("list[map[str,str]]"), t("map[str,str]"), K::SubsetInputInReturn},
        // conversion
        {t("jsonstr"), rec_s, K::Conversion},
        {t("map[str,str]"), t("jsonstr"), K::Conversion},
        {rec_i, t("jsonstr"), K::Conversion},
        {t("jsonstr[map[str,str]]"), t("map[str,int]"), K::Conversion},
        {t("jsonstr"), TypeSignature::object("Opaque", {}), K::Conversion},
        {t("jsonstr[map[str,str]]"), t("map[str,str]"), K::Conversion},
        // no rule applies
        {t("int"), t("bool"), none},
        {t("str"), t("int"), none},
        {t("bool"), t("str"), none},
        {t("int"), t("list[str]"), none},
        {t("str"), t("map[str,int]"), none},
        {t("vendor_a_type"), t("vendor_b_type"), none},
        {t("jsonstr"), t("str"), none},
        {t("jsonstr"), t("list[int]"), none},
        {rec_i, t("bool"), none},
        {t("float"), t("int"), none},
        {t("list[int]"), t("list[str]"), none},
        {t("map[str,str]"), t("map[str,int]"), none},
        {t("int"), t("map[int,str]"), none},   // map keys are not elements
    };

    int index = 0;
    for (const auto& c : cases) {
        auto got = types_compatible(c.ret, c.inp);
        if (got != c.want) {
            throw CheckFailure("hand-built case " + std::to_string(index) + " (" +
                               c.ret.to_string() + " vs " + c.inp.to_string() +
                               ") classified wrong");
        }
        ++index;
    }
    require(index >= 50, "need at least 50 hand-built cases, have " + std::to_string(index));
}

// ---------------------------------------------------------------------------
// Criterion 2

void criterion_pair_oracle() {
    std::mt19937 rng(20240517);
    const char* type_pool[] = {"str",  "int",     "bool",       "list[str]", "map[str,str]",
                               "jsonstr", "object:Rec", "float", "list[int]", "optional[str]"};
    for (int round = 0; round < 20; ++round) {
        ToolSet ts;
        int fn_count = 2 + static_cast<int>(rng() % 14);
        for (int i = 0; i < fn_count; ++i) {
            FunctionSpec fn;
            fn.name = "fn" + std::to_string(i);
            fn.description = "Handle the record";
            fn.return_signature = TypeSignature::parse(type_pool[rng() % 10]);
            int param_count = static_cast<int>(rng() % 4);
            for (int p = 0; p < param_count; ++p) {
                fn.params.push_back({"p" + std::to_string(p), "",
                                     TypeSignature::parse(type_pool[rng() % 10]), true});
            }
            ts.functions.push_back(std::move(fn));
        }

        std::set<std::string> oracle;
        for (const auto& f : ts.functions) {
            for (const auto& g : ts.functions) {
                for (const auto& param : g.params) {
                    auto kind = types_compatible(f.return_signature, param.signature);
                    if (kind) {
                        oracle.insert(f.name + "|" + g.name + "|" + param.name + "|" +
                                      to_string(*kind));
                    }
                }
            }
        }

        std::set<std::string> got;
        for (const auto& p : extract_compatible_pairs(ts)) {
            got.insert(p.upstream + "|" + p.downstream + "|" + p.matched_param + "|" +
                       to_string(p.compat));
        }
        require(got == oracle, "pair set mismatch in round " + std::to_string(round));
    }

    // Same comparison at the 121-function scale.
    const char* big_pool[] = {"str", "int", "list[str]", "map[str,str]", "jsonstr",
                              "object:Rec", "bool", "float"};
    ToolSet big;
    for (int i = 0; i < 121; ++i) {
        FunctionSpec fn;
        fn.name = "fn_" + std::to_string(i);
        fn.description = "Process the record";
        fn.return_signature = TypeSignature::parse(big_pool[i % 8]);
        fn.params.push_back({"a", "", TypeSignature::parse(big_pool[(i + 3) % 8]), true});
        fn.params.push_back({"b", "", TypeSignature::parse(big_pool[(i + 5) % 8]), true});
        big.functions.push_back(std::move(fn));
    }
    std::size_t brute_count = 0;
    for (const auto& f : big.functions) {
        for (const auto& g : big.functions) {
            for (const auto& param : g.params) {
                if (types_compatible(f.return_signature, param.signature)) ++brute_count;
            }
        }
    }
    require_eq(extract_compatible_pairs(big).size(), brute_count, "121-function pair count");
}

// ---------------------------------------------------------------------------
// Criterion 3

void dfs_all_simple_paths(const CallGraph& cg, const std::string& node, const std::string& sink,
                          std::size_t max_len, std::vector<std::string>& path,
                          std::set<std::vector<std::string>>& out) {
    if (node == sink && path.size() >= 2) {
        out.insert(path);
        return;
    }
    if (path.size() >= max_len) return;
    auto adj = cg.adjacency.find(node);
    if (adj == cg.adjacency.end()) return;
    for (const auto& edge : adj->second) {
        if (std::find(path.begin(), path.end(), edge.tgt) != path.end()) continue;
        path.push_back(edge.tgt);
        dfs_all_simple_paths(cg, edge.tgt, sink, max_len, path, out);
        path.pop_back();
    }
}

void criterion_chain_oracle() {
    std::mt19937 rng(77);
    for (int round = 0; round < 100; ++round) {
        int node_count = 2 + static_cast<int>(rng() % 9);
        std::vector<std::string> nodes;
        for (int i = 0; i < node_count; ++i) nodes.push_back("n" + std::to_string(i));
        std::vector<CallEdge> edges;
        for (int i = 0; i < node_count; ++i) {
            for (int j = 0; j < node_count; ++j) {
                if (i != j && rng() % 100 < 30) {
                    CallEdge e;
                    e.src = nodes[i];
                    e.tgt = nodes[j];
                    e.action = "step";
                    edges.push_back(std::move(e));
                }
            }
        }
        CallGraph cg = combine_call_graph(nodes, edges);

        for (const auto& source : cg.all_nodes) {
            for (const auto& sink : cg.all_nodes) {
                std::set<std::vector<std::string>> expected;
                if (cg.has_node(source) && cg.has_node(sink) && source != sink) {
                    std::vector<std::string> path{source};
                    dfs_all_simple_paths(cg, source, sink, 10, path, expected);
                }
                std::set<std::vector<std::string>> got;
                for (const auto& chain : retrieve_chains(cg, source, sink, 10)) {
                    got.insert(chain.nodes);
                }
                require(got == expected, "chain set mismatch for " + source + "->" + sink +
                                             " in round " + std::to_string(round));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 4

void criterion_edge_template() {
    VerbObject up = extract_verb_object("Read the content of an email", "read_email");
    VerbObject down = extract_verb_object("Send an email", "send_email");
    FunctionPair pair{"read_email", "send_email", "body", CompatKind::Equivalence,
                      Validation::Confirmed};
    CallEdge edge = generate_call_edge(pair, up, down);
    require_eq<std::string>(
        edge.action,
        "Based on the email content read by the previous step, the next step is to send the "
        "email based on the email content.",
        "edge action");
}

// ---------------------------------------------------------------------------
// Criterion 5

void criterion_ladtp_oracle() {
    ToolSet ts;
    FunctionSpec source;
    source.name = "pull";
    source.role = Role::Source;
    source.return_signature = TypeSignature::parse("map[str,str]");
    FunctionSpec sink;
    sink.name = "push";
    sink.role = Role::Sink;
    sink.return_signature = TypeSignature::parse("str");
    ts.functions = {source, sink};

    std::mt19937 rng(990125);
    for (int round = 0; round < 200; ++round) {
        int field_count = 1 + static_cast<int>(rng() % 8);
        std::vector<DataField> d_total;
        json record = json::object();
        for (int i = 0; i < field_count; ++i) {
            std::string name = "f" + std::to_string(i);
            std::string value = "distinct-" + std::to_string(round) + "-" + std::to_string(i) +
                                "-" + std::to_string(rng() % 100000);
            d_total.push_back({name, value});
            record[name] = value;
        }

        std::set<std::string> d_int;
        for (const auto& field : d_total) {
            if (rng() % 100 < 40) d_int.insert(field.name);
        }

        json sink_args = json::object();
        for (const auto& field : d_total) {
            if (rng() % 100 < 60) sink_args[field.name] = field.value;
        }
        if (rng() % 100 < 30) sink_args["aux"] = "fresh-" + std::to_string(round);

        std::set<std::string> d_nec;
        for (const auto& field : d_total) {
            if (rng() % 100 < 25) d_nec.insert(field.name);
        }
        if (sink_args.contains("aux")) d_nec.insert("aux");

        Trace trace;
        trace.prompt_ref = "fixture-" + std::to_string(round);
        TraceStep pull_step;
        pull_step.index = 0;
        pull_step.function = "pull";
        pull_step.kind = Observation::SourceFunction;
        pull_step.result = record;
        TraceStep push_step;
        push_step.index = 1;
        push_step.function = "push";
        push_step.kind = Observation::SinkFunction;
        push_step.args = sink_args;
        push_step.result = "sent";
        trace.steps = {pull_step, push_step};

        FixedNecessityJudge judge(d_nec);
        DOEFinding finding =
            analyze_data_flow(trace, d_total, d_int, judge, ts, exact_value_phi);

        std::set<std::string> expected =
            over_exposed_set(finding.exposure.d_total, finding.exposure.d_trans,
                             finding.exposure.d_int, finding.exposure.d_nec);
        require(finding.exposure.d_oe == expected,
                "LA-DTP dOE diverges from the set formula in round " + std::to_string(round));
        g_collected_exposures.push_back(finding.exposure);
    }
}

// ---------------------------------------------------------------------------
// Criterion 6

void criterion_golden_run() {
    AuditConfig cfg = motivating_config("golden");
    AuditReport report = run_audit(cfg);

    require_eq<std::size_t>(report.aggregates.total_chains, 1, "total chains");
    require_eq<std::size_t>(report.aggregates.chains_with_doe, 1, "chains with DOE");
    require_eq<std::size_t>(report.aggregates.total_prompts, 5, "total prompts");
    require_eq<std::size_t>(report.aggregates.prompts_with_doe, 5, "prompts with DOE");
    require(report.per_chain.size() == 1, "per-chain record count");
    for (const auto& prompt : report.per_chain[0].prompts) {
        require(prompt.over_exposed_fields == std::set<std::string>{"credit_card", "cvv"},
                "dOE must be exactly {credit_card, cvv} for " + prompt.prompt_ref);
    }

    std::string first = slurp(cfg.out_dir / artifacts::kReportJson);
    std::string first_text = slurp(cfg.out_dir / artifacts::kReportText);
    run_audit(cfg);
    require(slurp(cfg.out_dir / artifacts::kReportJson) == first,
            "report.json not byte-stable across runs");
    require(slurp(cfg.out_dir / artifacts::kReportText) == first_text,
            "report.txt not byte-stable across runs");

    json findings = json::parse(slurp(cfg.out_dir / artifacts::kFindings));
    for (const auto& doc : findings["findings"]) {
        g_collected_exposures.push_back(finding_from_json(doc).exposure);
    }
}

// ---------------------------------------------------------------------------
// Criterion 7

void criterion_voting() {
    auto verdict = [](FieldCategory category, const std::string& backend) {
        FieldVerdict v;
        v.field = "f";
        v.category = category;
        v.reasoning = "because " + backend;
        v.backend_id = backend;
        return v;
    };
    const FieldCategory cats[] = {FieldCategory::Intended, FieldCategory::Necessary,
                                  FieldCategory::OverExposed};

    int combinations = 0;
    for (FieldCategory a : cats) {
        for (FieldCategory b : cats) {
            for (FieldCategory c : cats) {
                ++combinations;
                std::vector<FieldVerdict> verdicts = {verdict(a, "m1"), verdict(b, "m2"),
                                                      verdict(c, "m3")};
                FieldVerdict base = majority_vote(verdicts);

                // Permutation invariance over all 6 orders.
                std::vector<int> order = {0, 1, 2};
                std::sort(order.begin(), order.end());
                do {
                    std::vector<FieldVerdict> permuted = {verdicts[order[0]], verdicts[order[1]],
                                                          verdicts[order[2]]};
                    FieldVerdict voted = majority_vote(permuted);
                    require(voted.category == base.category && voted.reasoning == base.reasoning,
                            "vote depends on member order");
                } while (std::next_permutation(order.begin(), order.end()));

                // Quorum law: flipping fewer than ceil((n+1)/2)=2 members of a
                // unanimous committee never changes the outcome.
                if (a == b && b == c) {
                    for (int position = 0; position < 3; ++position) {
                        for (FieldCategory flipped : cats) {
                            std::vector<FieldVerdict> one_flip = verdicts;
                            one_flip[position].category = flipped;
                            require(majority_vote(one_flip).category == a,
                                    "single flip moved a unanimous 3-member vote");
                        }
                    }
                }
            }
        }
    }
    require_eq(combinations, 27, "exhaustive 3-member combinations");

    // Conservative tie-break on 2-member committees.
    for (FieldCategory a : cats) {
        for (FieldCategory b : cats) {
            FieldVerdict voted = majority_vote({verdict(a, "m1"), verdict(b, "m2")});
            if (a == b) {
                require(voted.category == a, "agreeing pair must win");
            } else {
                require(voted.category == FieldCategory::OverExposed,
                        "ties must resolve to overExposed");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 8

void criterion_exposure_invariants() {
    require(g_collected_exposures.size() >= 200,
            "expected the suites of criteria 5 and 6 to contribute fixtures");
    for (std::size_t i = 0; i < g_collected_exposures.size(); ++i) {
        const ExposureSets& sets = g_collected_exposures[i];
        require(exposure_invariants_hold(sets),
                "exposure invariants violated in fixture " + std::to_string(i));
        for (const auto& field : sets.d_oe) {
            require(sets.d_total.count(field) == 1, "dOE outside dTotal");
            require(sets.d_trans.count(field) == 1, "dOE outside dTrans");
            require(sets.d_int.count(field) == 0, "dOE intersects dInt");
            require(sets.d_nec.count(field) == 0, "dOE intersects dNec");
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 9

void criterion_percentages() {
    require_eq<std::string>(render_percent(347, 608), "57.07%", "chain ratio");
    require_eq<std::string>(render_percent(1158, 3035), "38.15%", "prompt ratio");
    require_eq<std::string>(render_percent(1803, 2756), "65.42%", "field ratio");
    require_eq<std::string>(render_percent(93, 94), "98.94%", "coverage ratio");

    AuditReport totals;
    totals.aggregates.total_chains = 608;
    totals.aggregates.chains_with_doe = 347;
    totals.aggregates.total_prompts = 3035;
    totals.aggregates.prompts_with_doe = 1158;
    totals.aggregates.fields_transmitted = 2756;
    totals.aggregates.fields_over_exposed = 1803;
    std::string text = render_report(totals, ReportFormat::HumanText);
    require(text.find("347 / 608 (57.07%)") != std::string::npos, "rendered chain row");
    require(text.find("1,158 / 3,035 (38.15%)") != std::string::npos, "rendered prompt row");
    require(text.find("1,803 / 2,756 (65.42%)") != std::string::npos, "rendered field row");

    AuditReport coverage;
    coverage.aggregates.total_prompts = 94;
    coverage.aggregates.prompts_triggered = 93;
    std::string coverage_text = render_report(coverage, ReportFormat::HumanText);
    require(coverage_text.find("93 / 94 (98.94%)") != std::string::npos,
            "rendered coverage row");
}

// ---------------------------------------------------------------------------
// Criterion 10

void criterion_determinism() {
    AuditConfig staged = motivating_config("staged");
    stage_build_graph(staged);
    stage_list_chains(staged);
    stage_synthesize(staged);
    stage_execute(staged);
    stage_detect(staged);
    stage_report(staged);

    AuditConfig mono = motivating_config("mono");
    run_audit(mono);
    run_audit(mono);   // second run must not change a byte

    AuditConfig mono2 = motivating_config("mono2");
    run_audit(mono2);

    for (const char* artifact : {artifacts::kGraph, artifacts::kChains, artifacts::kPrompts,
                                 artifacts::kTraces, artifacts::kFindings, artifacts::kUsage,
                                 artifacts::kReportJson, artifacts::kReportText}) {
        std::string a = slurp(staged.out_dir / artifact);
        std::string b = slurp(mono.out_dir / artifact);
        std::string c = slurp(mono2.out_dir / artifact);
        require(a == b, std::string(artifact) + " differs between staged and monolithic runs");
        require(b == c, std::string(artifact) + " differs across monolithic runs");
    }
}

// ---------------------------------------------------------------------------
// Criterion 11

void criterion_performance() {
    // Stage 1 on a 121-function toolset in under a second.
    const char* type_pool[] = {"str", "int", "list[str]", "map[str,str]", "jsonstr",
                               "object:Rec", "bool", "float"};
    ToolSet big;
    big.scenario = "synthetic-121";
    for (int i = 0; i < 121; ++i) {
        FunctionSpec fn;
        fn.name = "fn_" + std::to_string(i);
        fn.description = "Process the record set";
        fn.return_signature = TypeSignature::parse(type_pool[i % 8]);
        fn.params.push_back({"a", "", TypeSignature::parse(type_pool[(i + 3) % 8]), true});
        fn.params.push_back({"b", "", TypeSignature::parse(type_pool[(i + 5) % 8]), true});
        big.functions.push_back(std::move(fn));
    }
    auto stage1_start = std::chrono::steady_clock::now();
    auto pairs = extract_compatible_pairs(big);
    auto stage1_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - stage1_start)
                         .count();
    require(!pairs.empty(), "synthetic toolset produced no pairs");
    require(stage1_ms < 1000,
            "stage 1 took " + std::to_string(stage1_ms) + " ms on 121 functions");

    // Full deterministic audit of a fixture with at least 10 chains.
    fs::path dir = scratch_dir("perf_inputs");
    json manifest;
    manifest["scenario"] = "records-perf";
    json functions = json::array();
    auto add_fn = [&](const std::string& name, const std::string& description) {
        functions.push_back({{"name", name},
                             {"tool", "records"},
                             {"description", description},
                             {"params", json::array({{{"name", "input"},
                                                      {"type", "str"},
                                                      {"description", "record set"},
                                                      {"required", true}}})},
                             {"returns", {{"type", "str"}}}});
    };
    add_fn("pull_alpha", "Read the record set of the alpha store");
    add_fn("pull_beta", "Read the record set of the beta store");
    add_fn("parse_records", "Parse the record set");
    add_fn("filter_records", "Filter the record set");
    add_fn("merge_records", "Merge the record set");
    add_fn("post_records", "Post the record set to the archive");
    add_fn("save_records", "Save the record set to the ledger");
    manifest["functions"] = std::move(functions);

    std::ofstream(dir / "manifest.json") << manifest.dump(2);
    std::ofstream(dir / "roles.json")
        << R"({"sources": ["pull_alpha", "pull_beta"], "sinks": ["post_records", "save_records"]})";
    std::ofstream(dir / "assets.json") << R"({
      "assets": {
        "records": {
          "identifier": "records.db",
          "fields": {"owner": "casey-owner-342", "balance": "balance-9911", "token": "tok-55x21"}
        }
      }
    })";
    std::ofstream(dir / "intent.json") << R"({"intent": ["balance"]})";

    AuditConfig cfg;
    cfg.manifest = dir / "manifest.json";
    cfg.roles = dir / "roles.json";
    cfg.assets = dir / "assets.json";
    cfg.intent = dir / "intent.json";
    cfg.max_chain_len = 4;
    cfg.out_dir = scratch_dir("perf_run");

    auto run_start = std::chrono::steady_clock::now();
    AuditReport report = run_audit(cfg);
    auto run_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - run_start)
                      .count();
    require(report.aggregates.total_chains >= 10,
            "perf fixture yielded only " + std::to_string(report.aggregates.total_chains) +
                " chains");
    require(run_ms < 60000, "end-to-end audit took " + std::to_string(run_ms) + " ms");
}

struct Criterion {
    int number;
    std::string name;
    std::function<void()> run;
    long limit_ms;   // 0 = no limit beyond what the body enforces
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "type-rule conformance (3 published examples + 50 hand-built)", criterion_type_rules,
         1000},
        {2, "pair-extraction brute-force oracle (20 random toolsets)", criterion_pair_oracle,
         5000},
        {3, "chain-enumeration DFS oracle (100 random graphs)", criterion_chain_oracle, 10000},
        {4, "call-edge template fidelity (read_email -> send_email)", criterion_edge_template, 0},
        {5, "LA-DTP equals the set formula (200 randomized traces)", criterion_ladtp_oracle,
         5000},
        {6, "golden run: transaction-log fixture flags {credit_card, cvv} x5",
         criterion_golden_run, 10000},
        {7, "voting: permutation invariance, quorum law, conservative ties", criterion_voting, 0},
        {8, "exposure-set invariants across all collected fixtures",
         criterion_exposure_invariants, 0},
        {9, "arithmetic reproduction of published ratios", criterion_percentages, 0},
        {10, "determinism and staged/monolithic equality", criterion_determinism, 0},
        {11, "performance floor: 121-function stage 1 < 1 s, >=10-chain audit < 60 s",
         criterion_performance, 0},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string error;
        try {
            criterion.run();
        } catch (const std::exception& e) {
            error = e.what();
        }
        auto elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        if (error.empty() && criterion.limit_ms > 0 && elapsed_ms >= criterion.limit_ms) {
            error = "exceeded " + std::to_string(criterion.limit_ms) + " ms limit";
        }
        if (error.empty()) {
            std::cout << "[PASS] criterion " << criterion.number << ": " << criterion.name << " ("
                      << elapsed_ms << " ms)\n";
        } else {
            ++failures;
            std::cout << "[FAIL] criterion " << criterion.number << ": " << criterion.name
                      << " -- " << error << " (" << elapsed_ms << " ms)\n";
        }
    }

    if (failures > 0) {
        std::cout << failures << " of " << criteria.size() << " criteria failed\n";
        return 1;
    }
    std::cout << "all " << criteria.size() << " criteria passed\n";
    return 0;
}
