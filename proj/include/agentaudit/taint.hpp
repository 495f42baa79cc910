#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "agentaudit/harness.hpp"

namespace agentaudit {

struct DataField {
    std::string name;    // dotted field path
    std::string value;   // rendered leaf value

    bool operator==(const DataField& other) const {
        return name == other.name && value == other.value;
    }
};

enum class TaintLabel { Target, Clean };
const char* to_string(TaintLabel label);

enum class FieldCategory { Intended, Necessary, OverExposed, Unresolved };
const char* to_string(FieldCategory category);
FieldCategory field_category_from_string(const std::string& s);

/// Per-field taint labels plus the ordered record of every field observed so
/// far. History is what earlier steps contributed; fields of the step being
/// processed never taint each other.
class TaintTable {
public:
    /// Where a history entry came from: retrieved data (source init or step
    /// results) or a step argument. Taint propagates through both; payload
    /// field recovery only matches retrieved data.
    enum class Origin { Init, Argument, Result };

    struct Entry {
        DataField field;
        TaintLabel label;
        Origin origin;
    };

    void add(DataField field, TaintLabel label, Origin origin);
    /// Freezes everything added so far as visible history for Φ lookups.
    void commit_step();

    TaintLabel label_of(const std::string& name) const;   // Clean when unseen
    bool seen(const std::string& name) const;
    const std::vector<Entry>& history() const { return history_; }

private:
    std::map<std::string, TaintLabel> labels_;
    std::vector<Entry> history_;      // committed, visible to Φ
    std::vector<Entry> pending_;      // added during the current step
};

/// Semantic dependency Φ(candidate, prior): does the candidate field derive
/// from the prior one?
using SemanticDependencyFn = std::function<bool(const DataField& candidate, const DataField& prior)>;

/// Default Φ: value equality, prior value contained in the candidate value,
/// whitespace/format-normalized equality, or leaf-name equality.
bool default_phi(const DataField& candidate, const DataField& prior);

/// Strict Φ: exact value equality only.
bool exact_value_phi(const DataField& candidate, const DataField& prior);

/// Last path segment ("body.card" → "card", "items[0]" → "items").
std::string leaf_name(const std::string& path);

/// Flattens a JSON value into dotted-path leaf fields; a bare scalar at the
/// root flattens to the synthetic name "value".
std::vector<DataField> flatten_fields(const nlohmann::json& value, const std::string& prefix = "");

/// D_OE = (D_trans \ (D_nec ∪ D_int)) ∩ D_total — pure set arithmetic.
std::set<std::string> over_exposed_set(const std::set<std::string>& d_total,
                                       const std::set<std::string>& d_trans,
                                       const std::set<std::string>& d_int,
                                       const std::set<std::string>& d_nec);

struct ExposureSets {
    std::set<std::string> d_total;
    std::set<std::string> d_trans;
    std::set<std::string> d_int;
    std::set<std::string> d_nec;
    std::set<std::string> d_oe;

    bool operator==(const ExposureSets& other) const = default;
};

/// dOE ⊆ dTotal, dOE ⊆ dTrans, dOE disjoint from dInt and dNec.
bool exposure_invariants_hold(const ExposureSets& sets);

/// Necessity-judge contract the taint engine consumes; the committee module
/// provides the production implementation and tests provide fixed ones.
class NecessityJudge {
public:
    virtual ~NecessityJudge() = default;
    virtual std::map<std::string, FieldCategory> assess(const FunctionSpec& sink,
                                                        const std::vector<DataField>& payload,
                                                        const std::set<std::string>& intent_fields,
                                                        const std::string& intent_text) = 0;
};

struct SinkEvent {
    int step_index = -1;
    std::set<std::string> d_trans;
    std::set<std::string> d_nec;
    std::set<std::string> d_oe;
    std::set<std::string> hallucinated;                // transmitted but outside D_total
    std::map<std::string, TaintLabel> labels;          // label of each transmitted field
};

struct DOEFinding {
    std::string chain_ref;
    std::string prompt_ref;
    int sink_step_index = -1;                          // first sink step, -1 when none
    ExposureSets exposure;
    std::map<std::string, FieldCategory> per_field;    // transmitted-field verdicts
    std::set<std::string> hallucinated;
    std::set<std::string> unresolved_fields;           // no member produced a verdict;
                                                       // degraded conservatively, flagged for review
    std::vector<SinkEvent> sink_events;
    bool has_sink_step = false;
    bool resolved = true;                              // false when the judge was unavailable

    bool involves_doe() const { return !exposure.d_oe.empty(); }
};

/// LA-DTP over one trace: labels D_total fields target unless user-intended,
/// propagates taint through step arguments and results via Φ, and at every
/// sink recovers the transmitted fields, asks the judge for D_nec, and
/// accumulates target-labeled unnecessary fields into D_OE. Transmitted
/// fields outside D_total are reported as hallucinated, never as DOE.
DOEFinding analyze_data_flow(const Trace& trace, const std::vector<DataField>& d_total,
                             const std::set<std::string>& d_int, NecessityJudge& judge,
                             const ToolSet& ts, SemanticDependencyFn phi = default_phi,
                             const std::string& intent_text = "");

/// D_total as observed at the trace's source steps (union of flattened
/// source results).
std::vector<DataField> collect_d_total(const Trace& trace);

nlohmann::json finding_to_json(const DOEFinding& finding);
DOEFinding finding_from_json(const nlohmann::json& doc);

} // namespace agentaudit
