#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace tsp {

/// Security category; the enumerator order is the total order Low < Moderate < High.
enum class Category { Low = 0, Moderate = 1, High = 2 };

inline constexpr std::array<Category, 3> kAllCategories{Category::Low, Category::Moderate, Category::High};

std::string_view to_string(Category c) noexcept;
std::optional<Category> parse_category(std::string_view s) noexcept;

/// Closed vocabulary of environment features derived from the passport.
enum class ContextTag {
    PrivilegedAccess,
    RemoteAccess,
    PublicFacing,
    ExternalInterconnect,
    CloudDeployment,
    Mobile,
    HighAvailabilityMission,
    SensitiveData,
    MultiTenant,
    UnattendedOperation,
};

inline constexpr std::array<ContextTag, 10> kAllContextTags{
    ContextTag::PrivilegedAccess,        ContextTag::RemoteAccess, ContextTag::PublicFacing,
    ContextTag::ExternalInterconnect,    ContextTag::CloudDeployment, ContextTag::Mobile,
    ContextTag::HighAvailabilityMission, ContextTag::SensitiveData, ContextTag::MultiTenant,
    ContextTag::UnattendedOperation,
};

std::string_view to_string(ContextTag t) noexcept;
std::optional<ContextTag> parse_context_tag(std::string_view s) noexcept;

/// Protection objectives a requirement can belong to.
enum class Objective { Confidentiality, Integrity, Availability, Accountability, Privacy, Continuity };

inline constexpr std::array<Objective, 6> kAllObjectives{
    Objective::Confidentiality, Objective::Integrity, Objective::Availability,
    Objective::Accountability,  Objective::Privacy,   Objective::Continuity,
};

std::string_view to_string(Objective o) noexcept;
std::optional<Objective> parse_objective(std::string_view s) noexcept;

/// How a control parameter value is interpreted. Durations and frequencies have a canonical
/// interval form and are subject to the never-relax rule.
enum class ValueKind { Duration, Frequency, Threshold, Directive, Scope };

std::string_view to_string(ValueKind k) noexcept;
std::optional<ValueKind> parse_value_kind(std::string_view s) noexcept;

} // namespace tsp
