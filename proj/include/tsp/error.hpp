#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace tsp {

/// Stable, machine-readable failure codes. The gateway exposes these names verbatim in
/// problem-detail responses, so renaming one is a wire-format change.
enum class ErrorCode {
    SchemaError,
    DanglingReference,
    BaselineNotMonotone,
    UnknownControl,
    EmptyDataCategories,
    ConfigError,
    RelaxationRejected,
    NoAdminRoles,
    InvalidEncoding,
    DimensionMismatch,
    EmbeddingError,
    FilterFieldUnknown,
    TemplateUnknown,
    CorruptIndex,
    BackendUnavailable,
    Timeout,
    BudgetExceeded,
    NoStructuredBlock,
    SchemaViolation,
    AlreadyUnderReview,
    AlreadyApproved,
    InvalidTransition,
    MissingJustification,
    MissingReason,
    ApprovalBlocked,
    UnknownSession,
    UnknownProfile,
    UnknownJob,
    UnknownChunk,
    Unauthorized,
    NotFound,
    IoError,
    Internal,
};

std::string_view to_string(ErrorCode code) noexcept;

/// All module failures are reported through this type. `details` carries structured
/// context (offending path, unresolved control ids, ...) for API consumers.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(message), code_(code), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    nlohmann::json details_;
};

} // namespace tsp
