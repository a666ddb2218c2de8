#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tsp/types.hpp"

namespace tsp::catalog {

/// A tightening rule: when `when_tag` is active in the system context, the parameter
/// should take `value` instead of its baseline minimum. `requires_fields` names passport
/// fields that must be filled before the rule can be judged at all.
struct RefinementRule {
    ContextTag when_tag{};
    std::string value;
    std::vector<std::string> requires_fields;

    friend bool operator==(const RefinementRule&, const RefinementRule&) = default;
};

struct Parameter {
    std::string key;
    std::string description;
    std::string baseline_value;
    ValueKind value_kind = ValueKind::Directive;
    std::vector<RefinementRule> refinement_rules;

    friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct MitigationTag {
    ContextTag tag{};
    double weight = 1.0;

    friend bool operator==(const MitigationTag&, const MitigationTag&) = default;
};

struct Control {
    std::string id;
    std::string name;
    std::string family;
    std::vector<Parameter> min_params;
    std::vector<std::string> enhancements;
    std::vector<std::string> related;
    std::vector<ContextTag> applicability_tags;
    std::vector<MitigationTag> mitigation_tags;

    /// Weight of `tag` in mitigation_tags, 0 if absent.
    double mitigation_weight(ContextTag tag) const noexcept;
    const Parameter* find_param(std::string_view key) const noexcept;
    bool is_enhancement() const noexcept { return id.find('(') != std::string::npos; }

    friend bool operator==(const Control&, const Control&) = default;
};

/// Per-family settings used for requirement mapping and accountability. Families absent
/// from the catalog file fall back to built-in defaults.
struct FamilyProfile {
    std::vector<Objective> objectives;
    std::vector<std::string> owner_keywords;
    std::vector<std::string> artifacts;

    friend bool operator==(const FamilyProfile&, const FamilyProfile&) = default;
};

using BaselineProfile = std::vector<Control>;

/// Immutable after parse; safe to share between threads.
class Catalog {
public:
    Catalog() = default;
    Catalog(std::string version, std::string source_doc_id, std::vector<Control> controls,
            std::map<Category, std::vector<std::string>> baselines, std::map<std::string, FamilyProfile> families);

    const std::string& version() const noexcept { return version_; }
    const std::string& source_doc_id() const noexcept { return source_doc_id_; }
    const std::vector<Control>& controls() const noexcept { return controls_; }
    const std::map<Category, std::vector<std::string>>& baselines() const noexcept { return baselines_; }
    const std::map<std::string, FamilyProfile>& families() const noexcept { return families_; }

    const Control* find(std::string_view id) const noexcept;
    bool contains(std::string_view id) const noexcept { return find(id) != nullptr; }

    /// Throws Error(UnknownControl).
    const Control& get_control(std::string_view id) const;

    /// Controls of the baseline for `category`, in file order.
    BaselineProfile baseline_for(Category category) const;

    /// Explicit family entry when present, built-in default otherwise.
    FamilyProfile family_profile(std::string_view family) const;

    friend bool operator==(const Catalog& a, const Catalog& b) {
        return a.version_ == b.version_ && a.source_doc_id_ == b.source_doc_id_ && a.controls_ == b.controls_ &&
               a.baselines_ == b.baselines_ && a.families_ == b.families_;
    }

private:
    std::string version_;
    std::string source_doc_id_;
    std::vector<Control> controls_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::map<Category, std::vector<std::string>> baselines_;
    std::map<std::string, FamilyProfile> families_;
};

/// Strict parse of the catalog JSON document. Throws Error with SchemaError,
/// DanglingReference or BaselineNotMonotone.
Catalog parse_catalog(std::string_view raw);

nlohmann::ordered_json to_json(const Catalog& catalog);
std::string serialize_catalog(const Catalog& catalog);

nlohmann::ordered_json to_json(const Control& control);

/// True for ids of the form `AC-2` or `AC-2(5)`.
bool is_valid_control_id(std::string_view id) noexcept;

/// Two-letter prefix of a control id.
std::string family_of(std::string_view id);

/// Built-in family defaults (AC and IR objective maps, owner keywords, artifact kinds).
FamilyProfile default_family_profile(std::string_view family);

} // namespace tsp::catalog
