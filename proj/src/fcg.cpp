#include "agentaudit/fcg.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "agentaudit/errors.hpp"

namespace agentaudit {

using nlohmann::json;

const char* to_string(Validation v) {
    switch (v) {
    case Validation::Pending: return "pending";
    case Validation::Confirmed: return "confirmed";
    case Validation::Rejected: return "rejected";
    }
    return "pending";
}

Validation validation_from_string(const std::string& s) {
    if (s == "confirmed") return Validation::Confirmed;
    if (s == "rejected") return Validation::Rejected;
    return Validation::Pending;
}

std::size_t CallGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& [node, edges] : adjacency) n += edges.size();
    return n;
}

std::vector<FunctionPair> extract_compatible_pairs(const ToolSet& ts) {
    std::vector<FunctionPair> pairs;
    for (const auto& up : ts.functions) {
        for (const auto& down : ts.functions) {
            for (const auto& param : down.params) {
                if (auto kind = types_compatible(up.return_signature, param.signature)) {
                    pairs.push_back({up.name, down.name, param.name, *kind, Validation::Pending});
                }
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const FunctionPair& a, const FunctionPair& b) {
        return std::tie(a.upstream, a.downstream, a.matched_param) <
               std::tie(b.upstream, b.downstream, b.matched_param);
    });
    return pairs;
}

namespace {

const std::set<std::string>& stop_words() {
    static const std::set<std::string> words = {
        // articles, pronouns, prepositions, glue
        "a", "an", "the", "of", "to", "from", "in", "into", "on", "at", "with",
        "for", "by", "via", "and", "or", "as", "is", "are", "be", "that", "this",
        "it", "its", "their", "your", "my", "all", "any", "each", "given", "specified",
        "specific", "new", "existing", "current",
        // common tool verbs; verbs must not link two descriptions
        "read", "reads", "write", "writes", "send", "sends", "get", "gets", "set",
        "sets", "list", "lists", "create", "creates", "update", "updates", "delete",
        "deletes", "search", "searches", "fetch", "fetches", "load", "loads",
        "execute", "executes", "run", "runs", "retrieve", "retrieves", "return",
        "returns", "obtain", "obtains", "look", "looks", "up",
    };
    return words;
}

std::string fold_plural(std::string word) {
    if (word.size() > 3 && word.back() == 's' && word[word.size() - 2] != 's')
        word.pop_back();
    return word;
}

std::set<std::string> content_words(const std::string& text) {
    std::set<std::string> out;
    std::string word;
    auto flush = [&] {
        if (!word.empty() && !stop_words().count(word)) out.insert(fold_plural(word));
        word.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '_') {
            word += static_cast<char>(std::tolower(c));
            if (c == '_') {
                word.pop_back();
                flush();
            }
        } else {
            flush();
        }
    }
    flush();
    return out;
}

} // namespace

bool KeywordOverlapJudge::logically_relevant(const FunctionSpec& upstream,
                                             const FunctionSpec& downstream,
                                             const std::string& matched_param) {
    std::set<std::string> up_words = content_words(upstream.description);
    std::set<std::string> down_words = content_words(downstream.description);
    for (const auto& p : downstream.params) {
        auto extra = content_words(p.name);
        down_words.insert(extra.begin(), extra.end());
    }
    if (const ParameterSpec* p = downstream.find_param(matched_param)) {
        auto extra = content_words(p->description);
        down_words.insert(extra.begin(), extra.end());
    }
    for (const auto& w : up_words) {
        if (down_words.count(w)) return true;
    }
    return false;
}

bool LlmSemanticJudge::logically_relevant(const FunctionSpec& upstream,
                                          const FunctionSpec& downstream,
                                          const std::string& matched_param) {
    CompletionRequest req;
    req.backend_id = backend_id_;
    req.stage = "fcg-validation";
    req.messages = {
        {"system",
         "You decide whether one tool function's output can logically serve as the input of "
         "another. Answer with exactly YES or NO."},
        {"user", "Upstream function: " + upstream.signature_line() +
                     "\nDownstream function: " + downstream.signature_line() +
                     "\nQuestion: is the upstream output logically relevant to serve as the "
                     "input \"" +
                     matched_param + "\" of the downstream function?"}};
    CompletionResponse resp = gateway_->complete(req);
    if (!resp.text) fail(ErrorCode::JudgeUnavailable, backend_id_ + " returned no text");
    return resp.text->find("YES") != std::string::npos;
}

FunctionPair validate_dependency(FunctionPair pair, const FunctionSpec& upstream,
                                 const FunctionSpec& downstream, SemanticJudge& judge) {
    if (pair.validated != Validation::Pending) return pair;
    bool relevant = judge.logically_relevant(upstream, downstream, pair.matched_param);
    pair.validated = relevant ? Validation::Confirmed : Validation::Rejected;
    return pair;
}

ValidationCache::ValidationCache(const std::filesystem::path& file) : file_(file) {
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) continue;
        entries_[doc.value("key", "")] = doc.value("confirmed", false);
    }
}

std::optional<bool> ValidationCache::lookup(const FunctionPair& pair) const {
    auto it = entries_.find(pair.key());
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ValidationCache::store(const FunctionPair& pair, bool confirmed,
                            const std::string& backend_id) {
    entries_[pair.key()] = confirmed;
    if (!file_) return;
    json doc;
    doc["key"] = pair.key();
    doc["confirmed"] = confirmed;
    doc["backend"] = backend_id;
    doc["timestamp"] = static_cast<long long>(std::time(nullptr));
    std::ofstream out(*file_, std::ios::app);
    out << doc.dump() << "\n";
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream stream(text);
    std::string token;
    while (stream >> token) tokens.push_back(token);
    return tokens;
}

std::string lowercase_strip(const std::string& token) {
    std::string out;
    for (unsigned char c : token) {
        if (std::isalnum(c) || c == '_' || c == '-') out += static_cast<char>(std::tolower(c));
    }
    return out;
}

bool is_article(const std::string& w) { return w == "a" || w == "an" || w == "the"; }

std::string drop_articles(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (is_article(w)) continue;
        if (!out.empty()) out += " ";
        out += w;
    }
    return out;
}

} // namespace

VerbObject extract_verb_object(const std::string& description,
                               const std::string& fallback_object) {
    std::vector<std::string> raw = whitespace_tokens(description);
    if (raw.empty()) fail(ErrorCode::EmptyDescription, "cannot extract verb/object");

    std::vector<std::string> words;
    for (const auto& t : raw) {
        std::string w = lowercase_strip(t);
        if (!w.empty()) words.push_back(w);
    }
    if (words.empty()) fail(ErrorCode::EmptyDescription, "description has no words");

    VerbObject vo;
    vo.verb = words.front();

    // Particles of phrasal verbs ride with the verb ("look up", "write out").
    static const std::set<std::string> particles = {"up", "down", "out", "off"};
    std::size_t object_start = 1;
    if (words.size() > 1 && particles.count(words[1])) {
        vo.verb += " " + words[1];
        object_start = 2;
    }

    // Object segment: everything after the verb up to the first linking
    // preposition ("of" is a reorder marker, not a cut point).
    static const std::set<std::string> cut_preps = {"into", "to", "from", "in", "on",
                                                    "at",   "with", "for", "via", "by"};
    std::vector<std::string> segment;
    for (std::size_t i = object_start; i < words.size(); ++i) {
        if (cut_preps.count(words[i])) break;
        segment.push_back(words[i]);
    }

    auto of_pos = std::find(segment.begin(), segment.end(), "of");
    if (of_pos != segment.end()) {
        // "the content of an email" -> "email content"
        std::vector<std::string> left(segment.begin(), of_pos);
        std::vector<std::string> right(of_pos + 1, segment.end());
        std::string left_str = drop_articles(left);
        std::string right_str = drop_articles(right);
        vo.object = right_str.empty() ? left_str
                    : left_str.empty() ? right_str
                                       : right_str + " " + left_str;
    } else if (!segment.empty()) {
        // Keep the noun phrase; normalize an indefinite article to "the".
        if (segment.front() == "a" || segment.front() == "an") segment.front() = "the";
        std::string joined;
        for (const auto& w : segment) {
            if (!joined.empty()) joined += " ";
            joined += w;
        }
        vo.object = joined;
    }

    if (vo.object.empty()) vo.object = fallback_object;
    return vo;
}

VerbObject LlmExtractor::extract(const FunctionSpec& fn) {
    CompletionRequest req;
    req.backend_id = backend_id_;
    req.stage = "fcg-validation";
    req.messages = {
        {"system",
         "Extract the core verb (action) and object (target) from a tool description. Answer "
         "as: verb | object"},
        {"user", fn.name + ": " + fn.description}};
    CompletionResponse resp = gateway_->complete(req);
    if (!resp.text) fail(ErrorCode::JudgeUnavailable, backend_id_ + " returned no text");
    auto bar = resp.text->find('|');
    if (bar == std::string::npos) return extract_verb_object(fn.description, fn.name);
    auto trim = [](std::string s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        return s;
    };
    return {trim(resp.text->substr(0, bar)), trim(resp.text->substr(bar + 1))};
}

CallEdge generate_call_edge(const FunctionPair& pair, const VerbObject& upstream_vo,
                            const VerbObject& downstream_vo) {
    // The {object1} slots sit behind a fixed "the"; an object that already
    // carries one would double it.
    std::string object1 = upstream_vo.object;
    if (object1.rfind("the ", 0) == 0) object1 = object1.substr(4);

    CallEdge edge;
    edge.src = pair.upstream;
    edge.tgt = pair.downstream;
    edge.upstream_vo = upstream_vo;
    edge.downstream_vo = downstream_vo;
    edge.compat = pair.compat;
    edge.verdict = pair.validated;
    edge.action = "Based on the " + object1 + " " + upstream_vo.verb +
                  " by the previous step, the next step is to " + downstream_vo.verb + " " +
                  downstream_vo.object + " based on the " + object1 + ".";
    return edge;
}

CallGraph combine_call_graph(const std::vector<std::string>& funcs,
                             const std::vector<CallEdge>& edges,
                             const std::vector<std::string>& sources) {
    CallGraph cg;
    for (const auto& f : funcs) {
        cg.all_nodes.insert(f);
        cg.adjacency[f];
    }
    cg.all_nodes.insert(cg.entry_node);
    cg.adjacency[cg.entry_node];

    auto add_edge = [&](const CallEdge& e) {
        auto& list = cg.adjacency[e.src];
        for (const auto& existing : list) {
            if (existing == e) return;
        }
        list.push_back(e);
    };

    for (const CallEdge& e : edges) {
        if ((e.src != cg.entry_node && !cg.all_nodes.count(e.src)) || !cg.all_nodes.count(e.tgt))
            continue;
        add_edge(e);
    }

    for (const auto& src_fn : sources) {
        if (!cg.all_nodes.count(src_fn)) continue;
        CallEdge start;
        start.src = cg.entry_node;
        start.tgt = src_fn;
        start.action = "start";
        add_edge(start);
    }

    for (auto& [node, list] : cg.adjacency) {
        std::sort(list.begin(), list.end(), [](const CallEdge& a, const CallEdge& b) {
            return std::tie(a.tgt, a.action) < std::tie(b.tgt, b.action);
        });
    }
    return cg;
}

FcgBuildResult build_fcg(const ToolSet& ts, SemanticJudge& judge, VerbObjectExtractor& extractor,
                         ValidationCache* cache, int workers) {
    FcgBuildResult result;
    result.pairs = extract_compatible_pairs(ts);

    // Stage 2 over pending pairs, optionally in parallel; verdicts land in a
    // fixed-index vector so the output order never depends on scheduling.
    auto validate_at = [&](std::size_t i) {
        FunctionPair& pair = result.pairs[i];
        if (cache) {
            if (auto cached = cache->lookup(pair)) {
                pair.validated = *cached ? Validation::Confirmed : Validation::Rejected;
                return;
            }
        }
        const FunctionSpec* up = ts.find(pair.upstream);
        const FunctionSpec* down = ts.find(pair.downstream);
        pair = validate_dependency(pair, *up, *down, judge);
        if (cache && pair.validated != Validation::Pending)
            cache->store(pair, pair.validated == Validation::Confirmed, judge.id());
    };

    if (workers <= 1 || result.pairs.size() < 2) {
        for (std::size_t i = 0; i < result.pairs.size(); ++i) validate_at(i);
    } else {
        std::mutex next_mu;
        std::size_t next = 0;
        auto worker = [&] {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(next_mu);
                    if (next >= result.pairs.size()) return;
                    i = next++;
                }
                validate_at(i);
            }
        };
        std::vector<std::thread> threads;
        int n = std::min<int>(workers, static_cast<int>(result.pairs.size()));
        threads.reserve(n);
        for (int t = 0; t < n; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    for (const auto& fn : ts.functions) {
        result.verb_objects[fn.name] = extractor.extract(fn);
    }

    std::vector<CallEdge> edges;
    for (const auto& pair : result.pairs) {
        if (pair.validated != Validation::Confirmed) continue;
        edges.push_back(generate_call_edge(pair, result.verb_objects.at(pair.upstream),
                                           result.verb_objects.at(pair.downstream)));
    }

    result.graph = combine_call_graph(ts.function_names(), edges, ts.sources());
    return result;
}

json fcg_to_json(const FcgBuildResult& result) {
    json doc;
    doc["entry"] = result.graph.entry_node;
    doc["nodes"] = json(result.graph.all_nodes);

    json edges = json::array();
    for (const auto& [node, list] : result.graph.adjacency) {
        for (const auto& e : list) {
            json edge;
            edge["src"] = e.src;
            edge["tgt"] = e.tgt;
            edge["action"] = e.action;
            edge["verb1"] = e.upstream_vo.verb;
            edge["object1"] = e.upstream_vo.object;
            edge["verb2"] = e.downstream_vo.verb;
            edge["object2"] = e.downstream_vo.object;
            if (e.compat) edge["compat"] = to_string(*e.compat);
            edge["verdict"] = to_string(e.verdict);
            edges.push_back(std::move(edge));
        }
    }
    doc["edges"] = std::move(edges);

    json pairs = json::array();
    for (const auto& p : result.pairs) {
        pairs.push_back({{"upstream", p.upstream},
                         {"downstream", p.downstream},
                         {"param", p.matched_param},
                         {"compat", to_string(p.compat)},
                         {"verdict", to_string(p.validated)}});
    }
    doc["pairs"] = std::move(pairs);

    json vos = json::object();
    for (const auto& [fn, vo] : result.verb_objects)
        vos[fn] = {{"verb", vo.verb}, {"object", vo.object}};
    doc["verb_objects"] = std::move(vos);
    return doc;
}

namespace {

CompatKind compat_from_string(const std::string& s) {
    if (s == "subsetReturnInInput") return CompatKind::SubsetReturnInInput;
    if (s == "subsetInputInReturn") return CompatKind::SubsetInputInReturn;
    if (s == "conversion") return CompatKind::Conversion;
    return CompatKind::Equivalence;
}

} // namespace

FcgBuildResult fcg_from_json(const json& doc) {
    FcgBuildResult result;
    std::vector<std::string> funcs;
    std::string entry = doc.value("entry", std::string(CallGraph::kEntryNode));
    for (const auto& n : doc["nodes"]) {
        std::string name = n.get<std::string>();
        if (name != entry) funcs.push_back(name);
    }
    std::vector<CallEdge> edges;
    std::vector<std::string> sources;
    for (const auto& e : doc["edges"]) {
        CallEdge edge;
        edge.src = e.value("src", "");
        edge.tgt = e.value("tgt", "");
        edge.action = e.value("action", "");
        edge.upstream_vo = {e.value("verb1", ""), e.value("object1", "")};
        edge.downstream_vo = {e.value("verb2", ""), e.value("object2", "")};
        if (e.contains("compat")) edge.compat = compat_from_string(e["compat"].get<std::string>());
        edge.verdict = validation_from_string(e.value("verdict", "confirmed"));
        if (edge.src == entry && edge.action == "start")
            sources.push_back(edge.tgt);
        else
            edges.push_back(std::move(edge));
    }
    result.graph = combine_call_graph(funcs, edges, sources);

    if (doc.contains("pairs")) {
        for (const auto& p : doc["pairs"]) {
            result.pairs.push_back({p.value("upstream", ""), p.value("downstream", ""),
                                    p.value("param", ""),
                                    compat_from_string(p.value("compat", "equivalence")),
                                    validation_from_string(p.value("verdict", "pending"))});
        }
    }
    if (doc.contains("verb_objects")) {
        for (auto& [fn, vo] : doc["verb_objects"].items())
            result.verb_objects[fn] = {vo.value("verb", ""), vo.value("object", "")};
    }
    return result;
}

} // namespace agentaudit
