#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tsp/catalog.hpp"
#include "tsp/decision.hpp"

namespace tsp::review {

enum class ControlState { Pending, Accepted, Edited, Overridden };
std::string_view to_string(ControlState s) noexcept;

struct ControlReview {
    ControlState state = ControlState::Pending;
    /// False when the state was reached through a bulk action.
    bool explicit_choice = false;
    friend bool operator==(const ControlReview&, const ControlReview&) = default;
};

enum class Action { Open, Accept, Edit, OverrideDecision, AddNote, Approve, Reopen };
std::string_view to_string(Action a) noexcept;
/// Throws Error(InvalidTransition) for names that are not per-control actions.
Action parse_control_action(std::string_view s);

struct AuditEntry {
    std::size_t seq = 0;
    std::string timestamp;
    std::string reviewer;
    std::string control_id; ///< empty for session-level entries
    Action action = Action::Open;
    std::string before_digest;
    std::string after_digest;
    std::string detail;
    friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

struct ReviewSession {
    std::string session_id;
    /// Identifier of the stored profile under review, when the caller tracks one.
    std::string profile_id;
    std::string reviewer;
    int round = 1;
    decision::TargetProfile profile;
    std::map<std::string, ControlReview> controls;
    std::vector<AuditEntry> audit;
    /// Set when this session reopens an approved profile.
    std::optional<decision::Approval> prior_approval;
    std::string prior_session_id;

    bool approved() const noexcept { return profile.status == decision::ProfileStatus::Approved; }
    /// Control ids that currently block approval, in record order.
    std::vector<std::string> blocking() const;
    bool approvable() const { return !approved() && blocking().empty(); }

    friend bool operator==(const ReviewSession&, const ReviewSession&) = default;
};

/// Starts review of a draft profile: every record pending, round 1, one open entry.
/// Throws Error(AlreadyUnderReview) or Error(AlreadyApproved).
ReviewSession open_session(const decision::TargetProfile& profile, const std::string& reviewer,
                           const std::string& session_id, const std::string& timestamp);

/// Applies one per-control action. Payloads:
///   accept           {}
///   edit             {target_params?: {key: value}, enhancements?: [...], rationale?: "..."}
///   override_decision {decision, justification, target_params?, enhancements?,
///                      compensation?: {compensating_control, justification, coverage?},
///                      adopt_alternative?: true}
///   add_note         {note}
/// Throws UnknownControl, InvalidTransition, RelaxationRejected, MissingJustification or
/// SchemaError; the session is unchanged on failure.
void record_action(ReviewSession& session, const catalog::Catalog& catalog, const std::string& control_id,
                   Action action, const nlohmann::json& payload, const std::string& reviewer,
                   const std::string& timestamp);

/// Accepts every pending control without marking the choice explicit. Returns the count.
std::size_t accept_all_pending(ReviewSession& session, const std::string& reviewer, const std::string& timestamp);

/// Freezes the profile. Throws Error(ApprovalBlocked) with details["unresolved"].
decision::TargetProfile approve(ReviewSession& session, const std::string& reviewer, const std::string& timestamp);

/// New round on an open session. An empty `controls` list reverts every control.
/// Throws MissingReason, UnknownControl, or InvalidTransition for an approved session.
void reopen(ReviewSession& session, const std::string& reviewer, const std::string& reason,
            const std::vector<std::string>& controls, const std::string& timestamp);

/// New session continuing an approved one: prior audit carried over, round incremented,
/// listed (or all) controls pending again, the rest keep their states.
ReviewSession reopen_approved(const ReviewSession& approved, const std::string& new_session_id,
                              const std::string& reviewer, const std::string& reason,
                              const std::vector<std::string>& controls, const std::string& timestamp);

/// SHA-256 over the audit trail.
std::string session_digest(const ReviewSession& session);

nlohmann::ordered_json to_json(const AuditEntry& e);
nlohmann::ordered_json to_json(const ReviewSession& s);

} // namespace tsp::review
