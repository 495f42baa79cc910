#pragma once

#include <optional>

#include "agentaudit/type_signature.hpp"

namespace agentaudit {

/// How an upstream return type can feed a downstream input type.
enum class CompatKind {
    Equivalence,          // return == input structurally
    SubsetReturnInInput,  // return occurs inside the input (fills an element)
    SubsetInputInReturn,  // input occurs inside the return (extractable part)
    Conversion,           // serialized payload <-> map/object
};

const char* to_string(CompatKind kind);

/// Classifies the (return, input) pair against the three dependency rules.
///
/// Equivalence is structural equality. Subset holds when one signature is a
/// nested component of the other, walking list elements, map values, optional
/// inners, and object members recursively (map keys and serialized hints are
/// not components a value hands over). Conversion covers exactly the
/// serialized-payload case: a jsonstr return feeding a map/object input or
/// the reverse. Rules are checked in that order and the first match wins, so
/// every compatible pair carries exactly one kind. No rule matching means
/// incompatible (nullopt).
std::optional<CompatKind> types_compatible(const TypeSignature& ret, const TypeSignature& inp);

} // namespace agentaudit
