#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "agentaudit/fcg.hpp"

namespace agentaudit {

/// Acyclic source→sink path: nodes in order, edges aligned to consecutive
/// node pairs. The entry node never appears in a chain.
struct CallChain {
    std::vector<std::string> nodes;
    std::vector<CallEdge> edges;

    bool operator==(const CallChain& other) const { return nodes == other.nodes; }
};

/// Stable identifier: digest of the node sequence.
std::string chain_id(const CallChain& chain);

/// All simple paths from source to sink with at most max_len nodes, in BFS
/// (shortest-first) order, lexicographic within a length. Absent endpoints
/// yield an empty list; paths stop at the sink and never revisit a node.
std::vector<CallChain> retrieve_chains(const CallGraph& cg, const std::string& source,
                                       const std::string& sink, std::size_t max_len);

/// Runs retrieve_chains for every (source-role, sink-role) pair of the
/// labeled toolset. Throws NoSources/NoSinks.
std::map<std::pair<std::string, std::string>, std::vector<CallChain>>
retrieve_all_chains(const CallGraph& cg, const ToolSet& ts, std::size_t max_len);

/// Chain prompt template: the edge instructions in chain order plus every
/// square-bracketed placeholder found in them.
struct ChainPromptTemplate {
    CallChain chain;
    std::vector<std::string> steps;
    std::set<std::string> placeholders;
};

ChainPromptTemplate build_chain_template(const CallChain& chain);

/// Scans "[token]" placeholders out of free text.
std::set<std::string> scan_placeholders(const std::string& text);

nlohmann::json chains_to_json(
    const std::map<std::pair<std::string, std::string>, std::vector<CallChain>>& chains);
std::map<std::pair<std::string, std::string>, std::vector<CallChain>> chains_from_json(
    const nlohmann::json& doc);

} // namespace agentaudit
