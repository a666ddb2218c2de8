#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tsp/catalog.hpp"
#include "tsp/matrix.hpp"
#include "tsp/passport.hpp"
#include "tsp/profiling.hpp"

namespace tsp::decision {

enum class Decision { Keep, Refine, Enhance, Add, Compensate };

inline constexpr Decision kAllDecisions[] = {Decision::Keep, Decision::Refine, Decision::Enhance, Decision::Add,
                                             Decision::Compensate};

std::string_view to_string(Decision d) noexcept;
std::optional<Decision> parse_decision(std::string_view s) noexcept;

/// Ordered key -> value map; order follows the control's min_params.
using ParamMap = std::vector<std::pair<std::string, std::string>>;

const std::string* find_param(const ParamMap& params, std::string_view key) noexcept;

struct CompensationRecord {
    std::string reason;
    double residual_risk = 0.0;
    /// Catalog control id or the text of a passport-declared measure; empty if nothing helps.
    std::string compensating_control;
    std::string justification;
    double coverage = 0.0;
    /// coverage >= the equivalence threshold. Below-equivalence records need explicit review.
    bool acceptable = false;

    friend bool operator==(const CompensationRecord&, const CompensationRecord&) = default;
};

/// The advisor's version of a record, kept when it disagrees with the rule engine.
struct AlternativeProposal {
    std::string source;
    Decision decision = Decision::Keep;
    ParamMap target_params;
    std::vector<std::string> enhancements;
    std::optional<CompensationRecord> compensation;
    std::string rationale;
    std::vector<std::string> citations;
    std::optional<double> confidence;

    friend bool operator==(const AlternativeProposal&, const AlternativeProposal&) = default;
};

struct TargetControlRecord {
    std::string control_id;
    Decision decision = Decision::Keep;
    ParamMap target_params;
    std::vector<std::string> enhancements;
    std::optional<CompensationRecord> compensation;
    std::string rationale;
    std::string owner;
    std::vector<std::string> artifacts;
    std::vector<std::string> citations;
    /// Passport fields whose absence kept the engine from judging adequacy.
    std::optional<std::vector<std::string>> insufficiency;

    // Reconciliation and review annotations.
    std::string rationale_source = "rule-engine";
    std::string advisor_status;
    bool conflict = false;
    std::optional<AlternativeProposal> alternative;
    std::vector<std::string> needs_clarification;
    std::optional<double> confidence;
    std::vector<std::string> notes;

    bool needs_explicit_review() const noexcept {
        return conflict || (compensation && !compensation->acceptable);
    }

    friend bool operator==(const TargetControlRecord&, const TargetControlRecord&) = default;
};

struct UncoveredTag {
    ContextTag tag{};
    double coverage = 0.0;
    friend bool operator==(const UncoveredTag&, const UncoveredTag&) = default;
};

struct RiskGap {
    double value = 0.0;
    std::vector<UncoveredTag> uncovered_tags;

    bool uncovered(ContextTag t) const noexcept;
    friend bool operator==(const RiskGap&, const RiskGap&) = default;
};

struct OpenItem {
    std::string kind;
    std::string subject;
    std::string detail;
    friend bool operator==(const OpenItem&, const OpenItem&) = default;
};

enum class ProfileStatus { Draft, UnderReview, Approved };
std::string_view to_string(ProfileStatus s) noexcept;

struct Provenance {
    std::string catalog_version;
    std::string passport_digest;
    matrix::Thresholds thresholds;
    std::string engine = "tsp-rule-engine/1";
    std::string advisor = "none";
    std::string timestamp;
    std::string session_digest;
    friend bool operator==(const Provenance& a, const Provenance& b) {
        return a.catalog_version == b.catalog_version && a.passport_digest == b.passport_digest &&
               a.thresholds.relevance == b.thresholds.relevance && a.thresholds.risk == b.thresholds.risk &&
               a.thresholds.equivalence == b.thresholds.equivalence &&
               a.thresholds.gap_coverage == b.thresholds.gap_coverage && a.engine == b.engine &&
               a.advisor == b.advisor && a.timestamp == b.timestamp && a.session_digest == b.session_digest;
    }
};

struct Approval {
    std::string reviewer;
    std::string timestamp;
    std::string session_id;
    int round = 1;
    std::string session_digest;
    friend bool operator==(const Approval&, const Approval&) = default;
};

/// T+ = T u E+ u C+: one record per baseline control, then Add records ordered by id.
struct TargetProfile {
    std::string system_name;
    Category category = Category::Low;
    profiling::RequirementSet requirements;
    std::vector<TargetControlRecord> records;
    std::vector<std::string> added_enhancements;
    std::vector<std::string> added_controls;
    RiskGap baseline_gap;
    RiskGap residual_gap;
    std::vector<OpenItem> open_items;
    ProfileStatus status = ProfileStatus::Draft;
    Provenance provenance;
    std::optional<Approval> approval;

    TargetControlRecord* find(std::string_view control_id) noexcept;
    const TargetControlRecord* find(std::string_view control_id) const noexcept;

    friend bool operator==(const TargetProfile&, const TargetProfile&) = default;
};

/// Total decision function with precedence Compensate > Refine > Enhance > Keep.
Decision decide(const matrix::MatrixRow& row, const matrix::Thresholds& thresholds);

/// Baseline values, tightened by the first active refinement rule for every decision other
/// than Keep. Rules whose required fields are among the row's gaps are skipped. Throws Error(RelaxationRejected) if a rule would loosen a duration/frequency
/// minimum, Error(ConfigError) for Add.
ParamMap instantiate_params(const matrix::MatrixRow& row, Decision decision);

/// Escalation (Refine/Enhance with risk above theta_risk) takes every candidate enhancement;
/// otherwise only candidates mitigating a tag in `gap` are taken. Never for Compensate/Add.
std::vector<std::string> select_enhancements(const matrix::MatrixRow& row, Decision decision,
                                             const matrix::Thresholds& thresholds, const catalog::Catalog& catalog,
                                             const RiskGap& gap = {});

/// Active context tags whose cumulative mitigation weight across `controls` stays below
/// `coverage_threshold`; value sums 1 - coverage over those tags.
RiskGap risk_gap(const passport::SystemModel& model, const std::vector<catalog::Control>& controls,
                 double coverage_threshold);

/// Gap left by the feasible rows of the matrix.
RiskGap risk_gap(const passport::SystemModel& model, const matrix::WorkingMatrix& matrix);

struct ExtraControls {
    std::vector<TargetControlRecord> records;
    std::vector<OpenItem> open_items;
};

/// For each uncovered tag, the non-excluded base control with the highest mitigation weight
/// for it (ties: smaller id). Records come back ordered by id with accountability unset.
ExtraControls add_extra_controls(const RiskGap& gap, const catalog::Catalog& catalog,
                                 const std::set<std::string>& excluded, const passport::SystemModel& model);

/// Fraction of `original`'s mitigation weight reproduced by `candidate` (per-tag min).
double mitigation_coverage(const std::vector<catalog::MitigationTag>& original,
                           const std::vector<catalog::MitigationTag>& candidate);

CompensationRecord compensate(const matrix::MatrixRow& row, const catalog::Catalog& catalog,
                              const passport::SystemModel& model, const matrix::Thresholds& thresholds);

struct Accountability {
    std::string owner;
    std::vector<std::string> artifacts;
};

/// Throws Error(NoAdminRoles) when the passport names no administrator roles.
Accountability assign_accountability(const TargetControlRecord& record, const passport::SystemModel& model,
                                     const catalog::Catalog& catalog);

TargetProfile build_rule_draft(const matrix::WorkingMatrix& matrix, const passport::SystemModel& model,
                               const profiling::RequirementSet& reqs, const catalog::Catalog& catalog,
                               Category category, Provenance provenance);

// Serialization.
nlohmann::ordered_json to_json(const TargetControlRecord& record);
nlohmann::ordered_json to_json(const TargetProfile& profile);
nlohmann::ordered_json to_json(const CompensationRecord& c);
nlohmann::ordered_json params_to_json(const ParamMap& params);
std::string serialize_profile(const TargetProfile& profile);

/// Strict inverse of to_json; ordered input keeps parameter order. Throws Error(SchemaError).
TargetControlRecord record_from_json(const nlohmann::ordered_json& j);
TargetProfile profile_from_json(const nlohmann::ordered_json& j);
TargetProfile parse_profile(std::string_view raw);

/// SHA-256 of a record's canonical JSON; used as before/after digests in the audit trail.
std::string record_digest(const TargetControlRecord& record);

/// Human report laid out as a comparison against the baseline.
std::string render_markdown(const TargetProfile& profile, const catalog::Catalog& catalog);

} // namespace tsp::decision
