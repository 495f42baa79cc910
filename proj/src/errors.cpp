#include "agentaudit/errors.hpp"

namespace agentaudit {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::DuplicateFunction: return "DuplicateFunction";
    case ErrorCode::UnresolvableType: return "UnresolvableType";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::EmptyDescription: return "EmptyDescription";
    case ErrorCode::JudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::UnresolvedTie: return "UnresolvedTie";
    case ErrorCode::UnresolvablePlaceholder: return "UnresolvablePlaceholder";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NoSources: return "NoSources";
    case ErrorCode::NoSinks: return "NoSinks";
    case ErrorCode::MissingUpstreamArtifact: return "MissingUpstreamArtifact";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

} // namespace agentaudit
