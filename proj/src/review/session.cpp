#include "tsp/review/session.hpp"

#include <algorithm>
#include <cctype>

#include "tsp/digest.hpp"
#include "tsp/error.hpp"
#include "tsp/interval.hpp"

namespace tsp::review {

using decision::Decision;
using decision::TargetControlRecord;

std::string_view to_string(ControlState s) noexcept {
    switch (s) {
    case ControlState::Pending: return "pending";
    case ControlState::Accepted: return "accepted";
    case ControlState::Edited: return "edited";
    case ControlState::Overridden: return "overridden";
    }
    return "pending";
}

std::string_view to_string(Action a) noexcept {
    switch (a) {
    case Action::Open: return "open";
    case Action::Accept: return "accept";
    case Action::Edit: return "edit";
    case Action::OverrideDecision: return "override_decision";
    case Action::AddNote: return "add_note";
    case Action::Approve: return "approve";
    case Action::Reopen: return "reopen";
    }
    return "open";
}

Action parse_control_action(std::string_view s) {
    for (auto a : {Action::Accept, Action::Edit, Action::OverrideDecision, Action::AddNote}) {
        if (to_string(a) == s) return a;
    }
    throw Error(ErrorCode::InvalidTransition, "'" + std::string(s) + "' is not a per-control review action",
                {{"action", std::string(s)}});
}

std::vector<std::string> ReviewSession::blocking() const {
    std::vector<std::string> out;
    for (const auto& rec : profile.records) {
        const auto it = controls.find(rec.control_id);
        if (it == controls.end()) continue;
        const auto& cr = it->second;
        if (cr.state == ControlState::Pending || (rec.needs_explicit_review() && !cr.explicit_choice)) {
            out.push_back(rec.control_id);
        }
    }
    return out;
}

namespace {

std::string profile_digest(const decision::TargetProfile& p) { return sha256_hex(decision::to_json(p).dump()); }

void append(ReviewSession& s, const std::string& reviewer, const std::string& control_id, Action action,
            std::string before, std::string after, std::string detail, const std::string& timestamp) {
    AuditEntry e;
    e.seq = s.audit.size() + 1;
    e.timestamp = timestamp;
    e.reviewer = reviewer;
    e.control_id = control_id;
    e.action = action;
    e.before_digest = std::move(before);
    e.after_digest = std::move(after);
    e.detail = std::move(detail);
    s.audit.push_back(std::move(e));
}

void ensure_open(const ReviewSession& s) {
    if (s.approved()) {
        throw Error(ErrorCode::InvalidTransition, "session " + s.session_id + " is approved; the profile is frozen",
                    {{"session_id", s.session_id}});
    }
}

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

const nlohmann::json* field(const nlohmann::json& payload, const char* key) {
    if (!payload.is_object()) schema("action payload must be a JSON object");
    auto it = payload.find(key);
    return it == payload.end() || it->is_null() ? nullptr : &*it;
}

std::string string_field(const nlohmann::json& payload, const char* key) {
    const auto* v = field(payload, key);
    if (!v) return {};
    if (!v->is_string()) schema(std::string("payload field '") + key + "' must be a string");
    return v->get<std::string>();
}

void only_keys(const nlohmann::json& payload, std::initializer_list<const char*> keys) {
    if (!payload.is_object()) schema("action payload must be a JSON object");
    for (auto it = payload.begin(); it != payload.end(); ++it) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
            schema("unknown payload field '" + it.key() + "'");
        }
    }
}

// Overlays payload values on `params`; every key must already exist and interval values
// may not drop below the catalog baseline.
void apply_params(decision::ParamMap& params, const nlohmann::json& values, const catalog::Control& control) {
    if (!values.is_object()) schema("target_params must be an object");
    for (auto it = values.begin(); it != values.end(); ++it) {
        if (!it->is_string()) schema("target_params." + it.key() + " must be a string");
        auto p = std::find_if(params.begin(), params.end(), [&](const auto& kv) { return kv.first == it.key(); });
        const auto* spec = control.find_param(it.key());
        if (p == params.end() || !spec) {
            throw Error(ErrorCode::SchemaError, control.id + " has no parameter '" + it.key() + "'",
                        {{"control_id", control.id}, {"param", it.key()}});
        }
        const auto value = it->get<std::string>();
        ensure_not_relaxed(control.id, spec->key, spec->value_kind, spec->baseline_value, value);
        p->second = value;
    }
}

std::vector<std::string> read_enhancements(const nlohmann::json& v, const catalog::Control& control) {
    if (!v.is_array()) schema("enhancements must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) schema("enhancements must be strings");
        const auto id = e.get<std::string>();
        if (std::find(control.enhancements.begin(), control.enhancements.end(), id) == control.enhancements.end()) {
            throw Error(ErrorCode::UnknownControl, id + " is not an enhancement of " + control.id,
                        {{"control_id", id}});
        }
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    return out;
}

void do_edit(TargetControlRecord& rec, const catalog::Control& control, const nlohmann::json& payload) {
    only_keys(payload, {"target_params", "enhancements", "rationale"});
    const auto* params = field(payload, "target_params");
    const auto* enh = field(payload, "enhancements");
    const auto rationale = string_field(payload, "rationale");
    if (!params && !enh && rationale.empty()) schema("edit needs target_params, enhancements or rationale");
    if (rec.decision == Decision::Compensate && enh) {
        throw Error(ErrorCode::InvalidTransition, "a compensated control takes no enhancements");
    }
    if (params) apply_params(rec.target_params, *params, control);
    if (enh) rec.enhancements = read_enhancements(*enh, control);
    if (!rationale.empty()) rec.rationale = rationale;
    rec.rationale_source = "expert";
}

void do_override(TargetControlRecord& rec, const catalog::Control& control, const nlohmann::json& payload) {
    only_keys(payload,
              {"decision", "justification", "target_params", "enhancements", "compensation", "adopt_alternative"});
    const auto justification = string_field(payload, "justification");
    if (std::all_of(justification.begin(), justification.end(), [](unsigned char c) { return std::isspace(c); })) {
        throw Error(ErrorCode::MissingJustification, "overriding a decision requires a justification",
                    {{"control_id", rec.control_id}});
    }
    const auto* adopt = field(payload, "adopt_alternative");
    if (adopt && (!adopt->is_boolean())) schema("adopt_alternative must be a boolean");
    const Decision from = rec.decision;

    if (adopt && adopt->get<bool>()) {
        if (!rec.alternative) {
            throw Error(ErrorCode::InvalidTransition, rec.control_id + " has no alternative proposal to adopt");
        }
        const auto alt = *rec.alternative;
        for (const auto& [k, v] : alt.target_params) {
            const auto* spec = control.find_param(k);
            if (!spec) schema(control.id + " has no parameter '" + k + "'");
            ensure_not_relaxed(control.id, k, spec->value_kind, spec->baseline_value, v);
        }
        rec.decision = alt.decision;
        rec.target_params = alt.target_params;
        rec.enhancements = alt.enhancements;
        rec.compensation = alt.compensation;
        rec.citations = alt.citations;
        rec.rationale = "Expert adopted the " + alt.source + " proposal (" + std::string(decision::to_string(from)) +
                        " -> " + std::string(decision::to_string(alt.decision)) + "): " + justification + " " +
                        alt.rationale;
        rec.rationale_source = "expert";
        return;
    }

    const auto label = string_field(payload, "decision");
    const auto to = decision::parse_decision(label);
    if (!to) schema("override needs a decision in {Keep, Refine, Enhance, Add, Compensate}");
    if (*to == Decision::Add) {
        throw Error(ErrorCode::InvalidTransition, "Add is reserved for controls outside the baseline");
    }
    if (*to == from) {
        throw Error(ErrorCode::InvalidTransition, "override must change the decision of " + rec.control_id,
                    {{"decision", label}});
    }

    auto params = rec.target_params;
    auto enhancements = rec.enhancements;
    std::optional<decision::CompensationRecord> compensation;
    if (*to == Decision::Keep) {
        params.clear();
        for (const auto& p : control.min_params) params.emplace_back(p.key, p.baseline_value);
        enhancements.clear();
    }
    if (const auto* p = field(payload, "target_params")) apply_params(params, *p, control);
    if (const auto* e = field(payload, "enhancements")) enhancements = read_enhancements(*e, control);
    if (*to == Decision::Compensate) {
        const auto* c = field(payload, "compensation");
        if (!c || !c->is_object()) {
            schema("override to Compensate needs a compensation object");
        }
        only_keys(*c, {"compensating_control", "justification", "coverage", "residual_risk"});
        decision::CompensationRecord rec_c;
        rec_c.reason = justification;
        rec_c.compensating_control = string_field(*c, "compensating_control");
        rec_c.justification = string_field(*c, "justification");
        if (rec_c.compensating_control.empty() || rec_c.justification.empty()) {
            schema("compensation needs compensating_control and justification");
        }
        for (const char* key : {"coverage", "residual_risk"}) {
            const auto* v = field(*c, key);
            if (!v) continue;
            if (!v->is_number() || v->get<double>() < 0.0 || v->get<double>() > 1.0) {
                schema(std::string("compensation.") + key + " must be a number in [0,1]");
            }
            (std::string_view(key) == "coverage" ? rec_c.coverage : rec_c.residual_risk) = v->get<double>();
        }
        rec_c.acceptable = true; // the expert's explicit decision stands in for the equivalence check
        compensation = std::move(rec_c);
        enhancements.clear();
    }
    rec.decision = *to;
    rec.target_params = std::move(params);
    rec.enhancements = std::move(enhancements);
    rec.compensation = std::move(compensation);
    rec.rationale = "Expert override (" + std::string(decision::to_string(from)) + " -> " + label + "): " + justification;
    rec.rationale_source = "expert";
}

} // namespace

ReviewSession open_session(const decision::TargetProfile& profile, const std::string& reviewer,
                           const std::string& session_id, const std::string& timestamp) {
    if (profile.status == decision::ProfileStatus::UnderReview) {
        throw Error(ErrorCode::AlreadyUnderReview, "profile is already under review");
    }
    if (profile.status == decision::ProfileStatus::Approved) {
        throw Error(ErrorCode::AlreadyApproved, "profile is already approved; reopen it instead");
    }
    if (reviewer.empty()) throw Error(ErrorCode::SchemaError, "reviewer identity is required");
    ReviewSession s;
    s.session_id = session_id;
    s.reviewer = reviewer;
    s.profile = profile;
    const auto before = profile_digest(s.profile);
    s.profile.status = decision::ProfileStatus::UnderReview;
    for (const auto& r : s.profile.records) s.controls[r.control_id] = {};
    append(s, reviewer, "", Action::Open, before, profile_digest(s.profile), "round 1", timestamp);
    return s;
}

void record_action(ReviewSession& session, const catalog::Catalog& catalog, const std::string& control_id,
                   Action action, const nlohmann::json& payload, const std::string& reviewer,
                   const std::string& timestamp) {
    ensure_open(session);
    auto* rec = session.profile.find(control_id);
    auto st = session.controls.find(control_id);
    if (!rec || st == session.controls.end()) {
        throw Error(ErrorCode::UnknownControl, control_id + " is not part of this profile", {{"control_id", control_id}});
    }
    const auto& control = catalog.get_control(control_id);
    TargetControlRecord next = *rec;
    ControlReview state = st->second;
    std::string detail;

    switch (action) {
    case Action::Accept:
        only_keys(payload.is_null() ? nlohmann::json::object() : payload, {});
        if (state.state != ControlState::Pending) {
            throw Error(ErrorCode::InvalidTransition,
                        control_id + " is " + std::string(to_string(state.state)) + "; only pending controls can be accepted",
                        {{"control_id", control_id}, {"state", to_string(state.state)}});
        }
        state = {ControlState::Accepted, true};
        break;
    case Action::Edit:
        do_edit(next, control, payload);
        if (auto probe = next; (probe.rationale_source = rec->rationale_source, probe == *rec)) {
            throw Error(ErrorCode::InvalidTransition, "edit leaves " + control_id + " unchanged",
                        {{"control_id", control_id}});
        }
        state = {ControlState::Edited, true};
        break;
    case Action::OverrideDecision:
        do_override(next, control, payload);
        detail = string_field(payload, "justification");
        state = {ControlState::Overridden, true};
        break;
    case Action::AddNote: {
        only_keys(payload, {"note"});
        const auto note = string_field(payload, "note");
        if (note.empty()) schema("add_note needs a non-empty note");
        next.notes.push_back(reviewer + ": " + note);
        detail = note;
        break;
    }
    default:
        throw Error(ErrorCode::InvalidTransition, std::string(to_string(action)) + " is not a per-control action");
    }

    const auto before = decision::record_digest(*rec);
    const auto after = decision::record_digest(next);
    *rec = std::move(next);
    st->second = state;
    append(session, reviewer, control_id, action, before, after, detail, timestamp);
}

std::size_t accept_all_pending(ReviewSession& session, const std::string& reviewer, const std::string& timestamp) {
    ensure_open(session);
    std::size_t n = 0;
    for (const auto& rec : session.profile.records) {
        auto& st = session.controls[rec.control_id];
        if (st.state != ControlState::Pending) continue;
        st = {ControlState::Accepted, false};
        const auto d = decision::record_digest(rec);
        append(session, reviewer, rec.control_id, Action::Accept, d, d, "bulk", timestamp);
        ++n;
    }
    return n;
}

std::string session_digest(const ReviewSession& session) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : session.audit) arr.push_back(to_json(e));
    return sha256_hex(arr.dump());
}

decision::TargetProfile approve(ReviewSession& session, const std::string& reviewer, const std::string& timestamp) {
    if (session.approved()) {
        throw Error(ErrorCode::InvalidTransition, "session " + session.session_id + " is already approved");
    }
    const auto blocked = session.blocking();
    if (!blocked.empty()) {
        std::string list;
        for (const auto& id : blocked) list += (list.empty() ? "" : ", ") + id;
        throw Error(ErrorCode::ApprovalBlocked, "approval blocked by unresolved controls: " + list,
                    {{"unresolved", blocked}});
    }
    const auto before = profile_digest(session.profile);
    const auto digest = session_digest(session);
    session.profile.status = decision::ProfileStatus::Approved;
    session.profile.provenance.session_digest = digest;
    session.profile.approval = decision::Approval{reviewer, timestamp, session.session_id, session.round, digest};
    append(session, reviewer, "", Action::Approve, before, profile_digest(session.profile), "", timestamp);
    return session.profile;
}

namespace {

void revert(ReviewSession& s, const std::string& reviewer, const std::string& reason,
            const std::vector<std::string>& controls, const std::string& timestamp, std::string before) {
    if (std::all_of(reason.begin(), reason.end(), [](unsigned char c) { return std::isspace(c); })) {
        throw Error(ErrorCode::MissingReason, "reopening a review requires a reason");
    }
    for (const auto& id : controls) {
        if (!s.controls.contains(id)) {
            throw Error(ErrorCode::UnknownControl, id + " is not part of this profile", {{"control_id", id}});
        }
    }
    const auto targets = controls.empty() ? [&] {
        std::vector<std::string> all;
        for (const auto& r : s.profile.records) all.push_back(r.control_id);
        return all;
    }() : controls;
    for (const auto& id : targets) s.controls[id] = {};
    ++s.round;
    std::string detail = "round " + std::to_string(s.round) + ": " + reason + " [";
    for (std::size_t i = 0; i < targets.size(); ++i) detail += (i ? ", " : "") + targets[i];
    detail += "]";
    append(s, reviewer, "", Action::Reopen, std::move(before), profile_digest(s.profile), detail, timestamp);
}

} // namespace

void reopen(ReviewSession& session, const std::string& reviewer, const std::string& reason,
            const std::vector<std::string>& controls, const std::string& timestamp) {
    if (session.approved()) {
        throw Error(ErrorCode::InvalidTransition,
                    "session " + session.session_id + " is approved; reopen the approved profile as a new session");
    }
    ReviewSession next = session;
    revert(next, reviewer, reason, controls, timestamp, profile_digest(session.profile));
    session = std::move(next);
}

ReviewSession reopen_approved(const ReviewSession& approved, const std::string& new_session_id,
                              const std::string& reviewer, const std::string& reason,
                              const std::vector<std::string>& controls, const std::string& timestamp) {
    if (!approved.approved()) {
        throw Error(ErrorCode::InvalidTransition, "session " + approved.session_id + " is not approved");
    }
    ReviewSession s = approved;
    const auto before = profile_digest(s.profile);
    s.session_id = new_session_id;
    s.reviewer = reviewer;
    s.prior_approval = approved.profile.approval;
    s.prior_session_id = approved.session_id;
    s.profile.approval.reset();
    s.profile.provenance.session_digest.clear();
    s.profile.status = decision::ProfileStatus::UnderReview;
    revert(s, reviewer, reason, controls, timestamp, before);
    return s;
}

nlohmann::ordered_json to_json(const AuditEntry& e) {
    nlohmann::ordered_json j;
    j["seq"] = e.seq;
    j["timestamp"] = e.timestamp;
    j["reviewer"] = e.reviewer;
    j["control_id"] = e.control_id;
    j["action"] = to_string(e.action);
    j["before_digest"] = e.before_digest;
    j["after_digest"] = e.after_digest;
    j["detail"] = e.detail;
    return j;
}

nlohmann::ordered_json to_json(const ReviewSession& s) {
    nlohmann::ordered_json j;
    j["session_id"] = s.session_id;
    if (!s.profile_id.empty()) j["profile_id"] = s.profile_id;
    j["reviewer"] = s.reviewer;
    j["round"] = s.round;
    j["status"] = s.approved() ? "approved" : "open";
    const auto blocked = s.blocking();
    j["approvable"] = !s.approved() && blocked.empty();
    j["blocking"] = blocked;
    nlohmann::ordered_json counts = {{"pending", 0}, {"accepted", 0}, {"edited", 0}, {"overridden", 0}};
    j["controls"] = nlohmann::ordered_json::object();
    for (const auto& rec : s.profile.records) {
        const auto& st = s.controls.at(rec.control_id);
        counts[std::string(to_string(st.state))] = counts[std::string(to_string(st.state))].get<int>() + 1;
        j["controls"][rec.control_id] = {{"state", to_string(st.state)},
                                         {"explicit", st.explicit_choice},
                                         {"conflict", rec.conflict},
                                         {"needs_explicit_review", rec.needs_explicit_review()},
                                         {"insufficiency", rec.insufficiency.has_value()}};
    }
    j["counts"] = counts;
    if (!s.prior_session_id.empty()) j["prior_session_id"] = s.prior_session_id;
    if (s.prior_approval) {
        j["prior_approval"] = {{"reviewer", s.prior_approval->reviewer},
                               {"timestamp", s.prior_approval->timestamp},
                               {"session_id", s.prior_approval->session_id},
                               {"round", s.prior_approval->round},
                               {"session_digest", s.prior_approval->session_digest}};
    }
    j["profile"] = decision::to_json(s.profile);
    j["audit"] = nlohmann::ordered_json::array();
    for (const auto& e : s.audit) j["audit"].push_back(to_json(e));
    return j;
}

} // namespace tsp::review
