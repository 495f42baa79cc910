#include "agentaudit/compat.hpp"

namespace agentaudit {

namespace {

using Kind = TypeSignature::Kind;

// True when `needle` equals a strict nested component of `hay`.
bool occurs_within(const TypeSignature& needle, const TypeSignature& hay) {
    auto component_matches = [&](const TypeSignature& part) {
        return part == needle || occurs_within(needle, part);
    };
    switch (hay.kind()) {
    case Kind::List:
        return component_matches(hay.element());
    case Kind::Map:
        return component_matches(hay.value());
    case Kind::Optional:
        return component_matches(hay.inner());
    case Kind::Object:
        for (std::size_t i = 0; i < hay.member_count(); ++i) {
            if (component_matches(hay.member_type(i))) return true;
        }
        return false;
    case Kind::Primitive:
    case Kind::Serialized:
        return false;
    }
    return false;
}

bool is_structured(const TypeSignature& t) {
    return t.kind() == Kind::Map || t.kind() == Kind::Object;
}

} // namespace

const char* to_string(CompatKind kind) {
    switch (kind) {
    case CompatKind::Equivalence: return "equivalence";
    case CompatKind::SubsetReturnInInput: return "subsetReturnInInput";
    case CompatKind::SubsetInputInReturn: return "subsetInputInReturn";
    case CompatKind::Conversion: return "conversion";
    }
    return "equivalence";
}

std::optional<CompatKind> types_compatible(const TypeSignature& ret, const TypeSignature& inp) {
    if (ret == inp) return CompatKind::Equivalence;
    if (occurs_within(ret, inp)) return CompatKind::SubsetReturnInInput;
    if (occurs_within(inp, ret)) return CompatKind::SubsetInputInReturn;
    if (ret.kind() == Kind::Serialized && is_structured(inp)) return CompatKind::Conversion;
    if (is_structured(ret) && inp.kind() == Kind::Serialized) return CompatKind::Conversion;
    return std::nullopt;
}

} // namespace agentaudit
