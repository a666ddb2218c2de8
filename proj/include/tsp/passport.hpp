#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tsp/catalog.hpp"
#include "tsp/types.hpp"

namespace tsp::passport {

struct ArchComponent {
    std::string name;
    std::string kind;
    std::string description;
    friend bool operator==(const ArchComponent&, const ArchComponent&) = default;
};

struct ImpactLevels {
    Category confidentiality = Category::Low;
    Category integrity = Category::Low;
    Category availability = Category::Low;

    Category high_water_mark() const noexcept;
    friend bool operator==(const ImpactLevels&, const ImpactLevels&) = default;
};

struct DataCategory {
    std::string name;
    ImpactLevels sensitivity;
    std::optional<std::string> legal_basis;
    bool personal = false;
    friend bool operator==(const DataCategory&, const DataCategory&) = default;
};

struct Integration {
    std::string name;
    std::string direction;
    std::string description;
    friend bool operator==(const Integration&, const Integration&) = default;
};

enum class Audience { Public, Partner, Internal };

struct ExposedInterface {
    std::string name;
    Audience audience = Audience::Internal;
    std::string protocol;
    friend bool operator==(const ExposedInterface&, const ExposedInterface&) = default;
};

struct DeploymentTraits {
    bool cloud = false;
    bool mobile_devices = false;
    bool remote_access = false;
    bool public_facing = false;
    std::vector<std::string> notes;
    /// Explicit flags; only multi-tenant and unattended-operation are accepted.
    std::vector<ContextTag> flags;
    friend bool operator==(const DeploymentTraits&, const DeploymentTraits&) = default;
};

struct Mission {
    std::string description;
    bool critical = false;
    friend bool operator==(const Mission&, const Mission&) = default;
};

struct CriticalPoint {
    std::string name;
    std::string description;
    friend bool operator==(const CriticalPoint&, const CriticalPoint&) = default;
};

/// A manual measure the passport author proposes in place of an infeasible control.
struct CompensatingMeasure {
    std::string description;
    std::vector<catalog::MitigationTag> mitigation_tags;
    friend bool operator==(const CompensatingMeasure&, const CompensatingMeasure&) = default;
};

struct InfeasibleDeclaration {
    std::string control_id;
    std::string reason;
    std::optional<CompensatingMeasure> compensating_measure;
    friend bool operator==(const InfeasibleDeclaration&, const InfeasibleDeclaration&) = default;
};

/// The structured system passport S = <A, D, U, Adm, I, Ext, C, M, F> plus infeasibility
/// declarations and named procedure descriptions.
struct SystemModel {
    std::string system_name;
    std::vector<ArchComponent> components;
    std::vector<DataCategory> data_categories;
    std::vector<std::string> user_roles;
    std::vector<std::string> admin_roles;
    std::vector<Integration> integrations;
    std::vector<ExposedInterface> external_services;
    std::optional<DeploymentTraits> deployment;
    std::vector<Mission> missions;
    std::vector<CriticalPoint> critical_assets;
    std::vector<InfeasibleDeclaration> infeasible_controls;
    std::map<std::string, std::string> procedures;

    /// Cached derive_context_tags(*this); parse_passport fills it.
    std::set<ContextTag> context_tags;

    bool has_tag(ContextTag t) const noexcept { return context_tags.contains(t); }
    const InfeasibleDeclaration* find_infeasible(std::string_view control_id) const noexcept;

    friend bool operator==(const SystemModel&, const SystemModel&) = default;
};

/// Pure function of the model's other fields; see the derivation table in docs/passport.md.
std::set<ContextTag> derive_context_tags(const SystemModel& model);

/// Throws Error(SchemaError) or Error(EmptyDataCategories).
SystemModel parse_passport(std::string_view raw);

nlohmann::ordered_json to_json(const SystemModel& model);
std::string serialize_passport(const SystemModel& model);

/// SHA-256 of the canonical serialization.
std::string passport_digest(const SystemModel& model);

/// The nine weighted S-tuple fields, in tuple order.
inline constexpr std::string_view kWeightedFields[] = {
    "components",   "data_categories",   "user_roles", "admin_roles",     "integrations",
    "external_services", "deployment",   "missions",   "critical_assets",
};

/// True if the passport field at `path` carries information. Lists count when non-empty,
/// deployment when declared, "procedures.<name>" when the named description is non-blank.
bool field_is_filled(const SystemModel& model, std::string_view path);

/// Passport fields a context tag is derived from.
std::vector<std::string> tag_source_fields(ContextTag tag);

/// Fields a control's refinement rules need (condition-tag sources and explicit
/// requirements) that the passport does not fill. Sorted, unique.
std::vector<std::string> control_gaps(const catalog::Control& control, const SystemModel& model);

struct CompletenessReport {
    double score = 0.0;
    std::vector<std::string> missing_fields;
    std::map<std::string, std::vector<std::string>> per_control_gaps;
};

CompletenessReport completeness(const SystemModel& model, const catalog::Catalog& catalog);

nlohmann::ordered_json to_json(const CompletenessReport& report);

} // namespace tsp::passport
