#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tsp/catalog.hpp"
#include "tsp/decision.hpp"
#include "tsp/passport.hpp"

namespace tsp::advisor {

struct DraftCompensation {
    std::string compensating_control;
    std::string justification;
    friend bool operator==(const DraftCompensation&, const DraftCompensation&) = default;
};

/// One control decision proposed by the model.
struct DraftDecision {
    std::string control_id;
    decision::Decision decision = decision::Decision::Keep;
    decision::ParamMap target_params;
    std::vector<std::string> enhancements;
    std::optional<DraftCompensation> compensation;
    std::string rationale;
    std::vector<std::string> cited_chunk_ids;
    std::optional<double> confidence;
    std::vector<std::string> needs_clarification;
    std::optional<std::vector<std::string>> insufficiency;
    friend bool operator==(const DraftDecision&, const DraftDecision&) = default;
};

/// Language tag of the fenced block carrying drafts.
inline constexpr std::string_view kDraftFence = "tsp-draft";

/// Extracts and strictly parses the first ```tsp-draft block. Surrounding prose is ignored.
/// Throws Error(NoStructuredBlock) or Error(SchemaViolation) with details["path"].
std::vector<DraftDecision> parse_response(std::string_view raw);

enum class ViolationKind { TraceabilityViolation, UnknownControl, SchemaViolation, RelaxationAttempt, MissingInsufficiencyFlag };
std::string_view to_string(ViolationKind k) noexcept;

struct Violation {
    ViolationKind kind{};
    std::string detail;
};

enum class ValidationStatus { Valid, Repaired, Rejected };
std::string_view to_string(ValidationStatus s) noexcept;

struct ValidationReport {
    std::string control_id;
    ValidationStatus status = ValidationStatus::Valid;
    std::vector<Violation> violations;
    /// For Repaired drafts: the passport gaps attached as the insufficiency flag.
    std::vector<std::string> repaired_insufficiency;

    bool has(ViolationKind k) const noexcept;
};

/// Chunk ids each control's prompt showed the model, keyed by control id.
using PromptCitations = std::map<std::string, std::vector<std::string>>;

/// One report per draft, same order. Valid when no violation is found; Repaired when the
/// only violation is a missing insufficiency flag (the known gaps are attached); Rejected
/// otherwise.
std::vector<ValidationReport> validate_draft(const std::vector<DraftDecision>& drafts,
                                             const PromptCitations& prompt_citations, const catalog::Catalog& catalog,
                                             const std::set<std::string>& baseline_ids,
                                             const passport::CompletenessReport& completeness);

/// Merges validated drafts into the rule-engine profile. Agreement (same decision, same
/// parameters after overlaying the draft on the engine's, same enhancement set) adopts the
/// model's rationale and citations. Disagreement keeps the engine record and attaches the
/// model's proposal with conflict=true. Rejected or absent drafts leave the engine record,
/// annotated; `request_errors` maps control ids whose request failed to the error text.
/// Model-only Add proposals become open items.
decision::TargetProfile reconcile(decision::TargetProfile rule_draft, const std::vector<DraftDecision>& drafts,
                                  const std::vector<ValidationReport>& reports,
                                  const std::map<std::string, std::string>& request_errors = {});

nlohmann::ordered_json to_json(const DraftDecision& d);
nlohmann::ordered_json to_json(const ValidationReport& r);

} // namespace tsp::advisor
