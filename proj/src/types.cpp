#include "tsp/types.hpp"

#include "tsp/error.hpp"

namespace tsp {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::BaselineNotMonotone: return "BaselineNotMonotone";
    case ErrorCode::UnknownControl: return "UnknownControl";
    case ErrorCode::EmptyDataCategories: return "EmptyDataCategories";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::RelaxationRejected: return "RelaxationRejected";
    case ErrorCode::NoAdminRoles: return "NoAdminRoles";
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmbeddingError: return "EmbeddingError";
    case ErrorCode::FilterFieldUnknown: return "FilterFieldUnknown";
    case ErrorCode::TemplateUnknown: return "TemplateUnknown";
    case ErrorCode::CorruptIndex: return "CorruptIndex";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NoStructuredBlock: return "NoStructuredBlock";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::AlreadyUnderReview: return "AlreadyUnderReview";
    case ErrorCode::AlreadyApproved: return "AlreadyApproved";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::MissingJustification: return "MissingJustification";
    case ErrorCode::MissingReason: return "MissingReason";
    case ErrorCode::ApprovalBlocked: return "ApprovalBlocked";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownProfile: return "UnknownProfile";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::UnknownChunk: return "UnknownChunk";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
    }
    return "Internal";
}

std::string_view to_string(Category c) noexcept {
    switch (c) {
    case Category::Low: return "Low";
    case Category::Moderate: return "Moderate";
    case Category::High: return "High";
    }
    return "Low";
}

std::optional<Category> parse_category(std::string_view s) noexcept {
    for (auto c : kAllCategories) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

std::string_view to_string(ContextTag t) noexcept {
    switch (t) {
    case ContextTag::PrivilegedAccess: return "privileged-access";
    case ContextTag::RemoteAccess: return "remote-access";
    case ContextTag::PublicFacing: return "public-facing";
    case ContextTag::ExternalInterconnect: return "external-interconnect";
    case ContextTag::CloudDeployment: return "cloud-deployment";
    case ContextTag::Mobile: return "mobile";
    case ContextTag::HighAvailabilityMission: return "high-availability-mission";
    case ContextTag::SensitiveData: return "sensitive-data";
    case ContextTag::MultiTenant: return "multi-tenant";
    case ContextTag::UnattendedOperation: return "unattended-operation";
    }
    return "";
}

std::optional<ContextTag> parse_context_tag(std::string_view s) noexcept {
    for (auto t : kAllContextTags) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::string_view to_string(Objective o) noexcept {
    switch (o) {
    case Objective::Confidentiality: return "Confidentiality";
    case Objective::Integrity: return "Integrity";
    case Objective::Availability: return "Availability";
    case Objective::Accountability: return "Accountability";
    case Objective::Privacy: return "Privacy";
    case Objective::Continuity: return "Continuity";
    }
    return "";
}

std::optional<Objective> parse_objective(std::string_view s) noexcept {
    for (auto o : kAllObjectives) {
        if (to_string(o) == s) return o;
    }
    return std::nullopt;
}

std::string_view to_string(ValueKind k) noexcept {
    switch (k) {
    case ValueKind::Duration: return "duration";
    case ValueKind::Frequency: return "frequency";
    case ValueKind::Threshold: return "threshold";
    case ValueKind::Directive: return "directive";
    case ValueKind::Scope: return "scope";
    }
    return "";
}

std::optional<ValueKind> parse_value_kind(std::string_view s) noexcept {
    for (auto k : {ValueKind::Duration, ValueKind::Frequency, ValueKind::Threshold, ValueKind::Directive,
                   ValueKind::Scope}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

} // namespace tsp
