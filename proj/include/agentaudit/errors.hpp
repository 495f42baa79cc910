#pragma once

#include <stdexcept>
#include <string>

namespace agentaudit {

enum class ErrorCode {
    MalformedManifest,
    DuplicateFunction,
    UnresolvableType,
    UnknownFunction,
    UnknownField,
    EmptyDescription,
    JudgeUnavailable,
    UnresolvedTie,
    UnresolvablePlaceholder,
    BackendUnavailable,
    BudgetExceeded,
    NoSources,
    NoSinks,
    MissingUpstreamArtifact,
    InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Single exception type for the whole library; the code distinguishes
/// the failure class so callers can branch without string matching.
class AuditError : public std::runtime_error {
public:
    AuditError(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw AuditError(code, msg);
}

} // namespace agentaudit
