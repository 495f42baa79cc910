#include "agentaudit/chains.hpp"

#include <algorithm>
#include <deque>

#include "agentaudit/errors.hpp"

namespace agentaudit {

using nlohmann::json;

std::string chain_id(const CallChain& chain) {
    std::string joined;
    for (const auto& n : chain.nodes) {
        if (!joined.empty()) joined += "->";
        joined += n;
    }
    return digest_hex(joined);
}

std::vector<CallChain> retrieve_chains(const CallGraph& cg, const std::string& source,
                                       const std::string& sink, std::size_t max_len) {
    std::vector<CallChain> valid;
    if (!cg.has_node(source) || !cg.has_node(sink)) return valid;
    if (source == sink || max_len < 2) return valid;

    struct PathState {
        std::vector<std::string> nodes;
        std::vector<CallEdge> edges;
    };

    std::deque<PathState> queue;
    queue.push_back({{source}, {}});

    while (!queue.empty()) {
        PathState current = std::move(queue.front());
        queue.pop_front();
        if (current.nodes.size() >= max_len) continue;

        auto adj = cg.adjacency.find(current.nodes.back());
        if (adj == cg.adjacency.end()) continue;

        // Adjacency lists are target-sorted; parallel edges to one target
        // collapse to the first, so enumeration is over node sequences.
        const std::string* last_target = nullptr;
        for (const CallEdge& edge : adj->second) {
            if (last_target && edge.tgt == *last_target) continue;
            last_target = &edge.tgt;
            if (std::find(current.nodes.begin(), current.nodes.end(), edge.tgt) !=
                current.nodes.end())
                continue;

            PathState extended = current;
            extended.nodes.push_back(edge.tgt);
            extended.edges.push_back(edge);
            if (edge.tgt == sink) {
                valid.push_back({extended.nodes, extended.edges});
                continue;   // a chain ends at the sink; no extension past it
            }
            queue.push_back(std::move(extended));
        }
    }
    return valid;
}

std::map<std::pair<std::string, std::string>, std::vector<CallChain>>
retrieve_all_chains(const CallGraph& cg, const ToolSet& ts, std::size_t max_len) {
    std::vector<std::string> sources = ts.sources();
    std::vector<std::string> sinks = ts.sinks();
    if (sources.empty()) fail(ErrorCode::NoSources, "toolset has no source-role functions");
    if (sinks.empty()) fail(ErrorCode::NoSinks, "toolset has no sink-role functions");

    std::map<std::pair<std::string, std::string>, std::vector<CallChain>> out;
    for (const auto& source : sources) {
        for (const auto& sink : sinks) {
            out[{source, sink}] = retrieve_chains(cg, source, sink, max_len);
        }
    }
    return out;
}

std::set<std::string> scan_placeholders(const std::string& text) {
    std::set<std::string> found;
    std::size_t pos = 0;
    while ((pos = text.find('[', pos)) != std::string::npos) {
        std::size_t end = text.find(']', pos + 1);
        if (end == std::string::npos) break;
        std::string token = text.substr(pos, end - pos + 1);
        bool lowercase_token = token.size() > 2;
        for (std::size_t i = 1; i + 1 < token.size(); ++i) {
            char c = token[i];
            if (!(std::islower(static_cast<unsigned char>(c)) || c == '_')) {
                lowercase_token = false;
                break;
            }
        }
        if (lowercase_token) found.insert(token);
        pos = end + 1;
    }
    return found;
}

ChainPromptTemplate build_chain_template(const CallChain& chain) {
    ChainPromptTemplate tpl;
    tpl.chain = chain;
    for (const auto& edge : chain.edges) {
        tpl.steps.push_back(edge.action);
        auto found = scan_placeholders(edge.action);
        tpl.placeholders.insert(found.begin(), found.end());
    }
    return tpl;
}

json chains_to_json(
    const std::map<std::pair<std::string, std::string>, std::vector<CallChain>>& chains) {
    json doc;
    json list = json::array();
    for (const auto& [pair, chain_list] : chains) {
        for (const auto& chain : chain_list) {
            ChainPromptTemplate tpl = build_chain_template(chain);
            json entry;
            entry["id"] = chain_id(chain);
            entry["source"] = pair.first;
            entry["sink"] = pair.second;
            entry["nodes"] = chain.nodes;
            json edges = json::array();
            for (const auto& e : chain.edges) {
                edges.push_back({{"src", e.src}, {"tgt", e.tgt}, {"action", e.action}});
            }
            entry["edges"] = std::move(edges);
            entry["steps"] = tpl.steps;
            entry["placeholders"] = json(tpl.placeholders);
            list.push_back(std::move(entry));
        }
    }
    doc["chains"] = std::move(list);
    return doc;
}

std::map<std::pair<std::string, std::string>, std::vector<CallChain>> chains_from_json(
    const json& doc) {
    std::map<std::pair<std::string, std::string>, std::vector<CallChain>> out;
    for (const auto& entry : doc["chains"]) {
        CallChain chain;
        for (const auto& n : entry["nodes"]) chain.nodes.push_back(n.get<std::string>());
        for (const auto& e : entry["edges"]) {
            CallEdge edge;
            edge.src = e.value("src", "");
            edge.tgt = e.value("tgt", "");
            edge.action = e.value("action", "");
            chain.edges.push_back(std::move(edge));
        }
        out[{entry.value("source", ""), entry.value("sink", "")}].push_back(std::move(chain));
    }
    return out;
}

} // namespace agentaudit
