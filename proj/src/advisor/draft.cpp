#include "tsp/advisor/draft.hpp"

#include <algorithm>

#include "tsp/error.hpp"
#include "tsp/interval.hpp"

namespace tsp::advisor {

using decision::Decision;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::SchemaViolation, path + ": " + what, {{"path", path}});
}

std::vector<std::string> string_list(const ordered_json& v, const std::string& path) {
    if (!v.is_array()) violation(path, "expected array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) violation(path + "[" + std::to_string(i) + "]", "expected string");
        out.push_back(v[i].get<std::string>());
    }
    return out;
}

DraftDecision parse_one(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) violation(path, "expected object");
    static const std::set<std::string> kKnown{"control_id",    "decision",   "target_params",       "enhancements",
                                              "rationale",     "cited_chunk_ids", "confidence",     "needs_clarification",
                                              "insufficiency", "compensation"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!kKnown.contains(it.key())) violation(path + "." + it.key(), "unknown field");
    }
    auto req = [&](const char* key) -> const ordered_json& {
        if (!j.contains(key)) violation(path + "." + key, "missing required field");
        return j[key];
    };
    auto str = [&](const char* key) {
        const auto& v = req(key);
        if (!v.is_string()) violation(path + "." + key, "expected string");
        return v.get<std::string>();
    };

    DraftDecision d;
    d.control_id = str("control_id");
    if (d.control_id.empty()) violation(path + ".control_id", "must not be empty");
    const auto label = str("decision");
    auto dec = decision::parse_decision(label);
    if (!dec) violation(path + ".decision", "'" + label + "' is not one of Keep, Refine, Enhance, Add, Compensate");
    d.decision = *dec;

    const auto& params = req("target_params");
    if (!params.is_object()) violation(path + ".target_params", "expected object");
    for (auto it = params.begin(); it != params.end(); ++it) {
        if (!it->is_string()) violation(path + ".target_params." + it.key(), "expected string");
        d.target_params.emplace_back(it.key(), it->get<std::string>());
    }
    d.enhancements = string_list(req("enhancements"), path + ".enhancements");
    d.rationale = str("rationale");
    d.cited_chunk_ids = string_list(req("cited_chunk_ids"), path + ".cited_chunk_ids");

    if (j.contains("confidence") && !j["confidence"].is_null()) {
        const auto& c = j["confidence"];
        if (!c.is_number() || c.get<double>() < 0.0 || c.get<double>() > 1.0) {
            violation(path + ".confidence", "expected number in [0,1]");
        }
        d.confidence = c.get<double>();
    }
    if (j.contains("needs_clarification")) {
        d.needs_clarification = string_list(j["needs_clarification"], path + ".needs_clarification");
    }
    if (j.contains("insufficiency")) d.insufficiency = string_list(j["insufficiency"], path + ".insufficiency");
    if (j.contains("compensation")) {
        const auto& c = j["compensation"];
        const auto cp = path + ".compensation";
        if (!c.is_object()) violation(cp, "expected object");
        DraftCompensation comp;
        for (auto it = c.begin(); it != c.end(); ++it) {
            if (it.key() != "compensating_control" && it.key() != "justification") {
                violation(cp + "." + it.key(), "unknown field");
            }
            if (!it->is_string()) violation(cp + "." + it.key(), "expected string");
        }
        if (!c.contains("justification")) violation(cp + ".justification", "missing required field");
        comp.compensating_control = c.value("compensating_control", "");
        comp.justification = c["justification"].get<std::string>();
        d.compensation = std::move(comp);
    }
    return d;
}

template <class T>
bool contains(const std::vector<T>& v, const T& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

} // namespace

std::vector<DraftDecision> parse_response(std::string_view raw) {
    const std::string open = "```" + std::string(kDraftFence);
    auto start = raw.find(open);
    while (start != std::string_view::npos) {
        const auto after = start + open.size();
        // The tag must end the fence line ("```tsp-draft-x" is a different block).
        if (after == raw.size() || raw[after] == '\n' || raw[after] == '\r' || raw[after] == ' ') break;
        start = raw.find(open, after);
    }
    if (start == std::string_view::npos) {
        throw Error(ErrorCode::NoStructuredBlock, "response contains no ```" + std::string(kDraftFence) + " block");
    }
    const auto body_start = raw.find('\n', start);
    if (body_start == std::string_view::npos) throw Error(ErrorCode::NoStructuredBlock, "unterminated draft block");
    const auto close = raw.find("```", body_start + 1);
    if (close == std::string_view::npos) throw Error(ErrorCode::NoStructuredBlock, "unterminated draft block");
    const auto body = raw.substr(body_start + 1, close - body_start - 1);

    ordered_json j;
    try {
        j = ordered_json::parse(body.begin(), body.end());
    } catch (const nlohmann::json::parse_error& e) {
        violation("$", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_array()) violation("$", "expected a JSON array of draft decisions");
    std::vector<DraftDecision> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_one(j[i], "$[" + std::to_string(i) + "]"));
    return out;
}

std::string_view to_string(ViolationKind k) noexcept {
    switch (k) {
    case ViolationKind::TraceabilityViolation: return "TraceabilityViolation";
    case ViolationKind::UnknownControl: return "UnknownControl";
    case ViolationKind::SchemaViolation: return "SchemaViolation";
    case ViolationKind::RelaxationAttempt: return "RelaxationAttempt";
    case ViolationKind::MissingInsufficiencyFlag: return "MissingInsufficiencyFlag";
    }
    return "SchemaViolation";
}

std::string_view to_string(ValidationStatus s) noexcept {
    switch (s) {
    case ValidationStatus::Valid: return "valid";
    case ValidationStatus::Repaired: return "repaired";
    case ValidationStatus::Rejected: return "rejected";
    }
    return "rejected";
}

bool ValidationReport::has(ViolationKind k) const noexcept {
    return std::any_of(violations.begin(), violations.end(), [k](const auto& v) { return v.kind == k; });
}

std::vector<ValidationReport> validate_draft(const std::vector<DraftDecision>& drafts,
                                             const PromptCitations& prompt_citations, const catalog::Catalog& catalog,
                                             const std::set<std::string>& baseline_ids,
                                             const passport::CompletenessReport& completeness) {
    std::vector<ValidationReport> out;
    std::set<std::string> seen;
    for (const auto& d : drafts) {
        ValidationReport rep;
        rep.control_id = d.control_id;
        auto add = [&](ViolationKind k, std::string detail) { rep.violations.push_back({k, std::move(detail)}); };

        if (!seen.insert(d.control_id).second) add(ViolationKind::SchemaViolation, "duplicate draft for " + d.control_id);

        // (a) citations must come from this control's prompt.
        const auto pc = prompt_citations.find(d.control_id);
        for (const auto& id : d.cited_chunk_ids) {
            if (pc == prompt_citations.end() || !contains(pc->second, id)) {
                add(ViolationKind::TraceabilityViolation, "cites " + id + ", which its prompt did not contain");
            }
        }

        // (b) control resolution.
        const auto* control = catalog.find(d.control_id);
        if (!control) {
            add(ViolationKind::UnknownControl, d.control_id + " is not in the catalog");
        } else if (d.decision != Decision::Add && !baseline_ids.contains(d.control_id)) {
            add(ViolationKind::UnknownControl, d.control_id + " is not in the baseline");
        } else if (d.decision == Decision::Add && baseline_ids.contains(d.control_id)) {
            add(ViolationKind::SchemaViolation, "Add proposed for baseline control " + d.control_id);
        }

        if (control) {
            // (c) parameters: known keys, never looser than the baseline floor.
            for (const auto& [key, value] : d.target_params) {
                const auto* p = control->find_param(key);
                if (!p) {
                    add(ViolationKind::SchemaViolation, d.control_id + " has no parameter '" + key + "'");
                    continue;
                }
                if (!has_interval_form(p->value_kind)) continue;
                try {
                    if (relaxes_baseline(p->value_kind, p->baseline_value, value)) {
                        add(ViolationKind::RelaxationAttempt, key + " = '" + value + "' is weaker than baseline '" +
                                                                  p->baseline_value + "'");
                    }
                } catch (const Error&) {
                    add(ViolationKind::SchemaViolation, key + " = '" + value + "' has no recognisable interval");
                }
            }
            for (const auto& e : d.enhancements) {
                if (!contains(control->enhancements, e)) {
                    add(ViolationKind::UnknownControl, e + " is not an enhancement of " + d.control_id);
                }
            }
        }
        if (d.decision == Decision::Compensate && !d.compensation) {
            add(ViolationKind::SchemaViolation, "Compensate without a compensation object");
        }

        // (d) known passport gaps must be acknowledged.
        const auto gaps = completeness.per_control_gaps.find(d.control_id);
        const bool flagged = !d.needs_clarification.empty() || (d.insufficiency && !d.insufficiency->empty());
        if (gaps != completeness.per_control_gaps.end() && !gaps->second.empty() && !flagged) {
            std::string fields;
            for (const auto& f : gaps->second) fields += (fields.empty() ? "" : ", ") + f;
            add(ViolationKind::MissingInsufficiencyFlag, "passport lacks " + fields + " but the draft raises no flag");
        }

        if (rep.violations.empty()) {
            rep.status = ValidationStatus::Valid;
        } else if (rep.violations.size() == 1 && rep.violations[0].kind == ViolationKind::MissingInsufficiencyFlag) {
            rep.status = ValidationStatus::Repaired;
            rep.repaired_insufficiency = gaps->second;
        } else {
            rep.status = ValidationStatus::Rejected;
        }
        out.push_back(std::move(rep));
    }
    return out;
}

namespace {

std::vector<std::string> sorted(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

void merge_insufficiency(decision::TargetControlRecord& rec, const std::vector<std::string>& extra) {
    if (extra.empty()) return;
    auto all = rec.insufficiency.value_or(std::vector<std::string>{});
    all.insert(all.end(), extra.begin(), extra.end());
    rec.insufficiency = sorted(std::move(all));
}

std::string kinds(const ValidationReport& r) {
    std::string out;
    for (const auto& v : r.violations) {
        const auto k = std::string(to_string(v.kind));
        if (out.find(k) == std::string::npos) out += (out.empty() ? "" : ", ") + k;
    }
    return out;
}

} // namespace

decision::TargetProfile reconcile(decision::TargetProfile profile, const std::vector<DraftDecision>& drafts,
                                  const std::vector<ValidationReport>& reports,
                                  const std::map<std::string, std::string>& request_errors) {
    if (drafts.size() != reports.size()) {
        throw Error(ErrorCode::Internal, "reconcile needs one validation report per draft");
    }
    for (auto& rec : profile.records) {
        const DraftDecision* draft = nullptr;
        const ValidationReport* report = nullptr;
        const ValidationReport* rejected = nullptr;
        for (std::size_t i = 0; i < drafts.size(); ++i) {
            if (drafts[i].control_id != rec.control_id) continue;
            if (reports[i].status == ValidationStatus::Rejected) {
                if (!rejected) rejected = &reports[i];
                continue;
            }
            if (!draft) {
                draft = &drafts[i];
                report = &reports[i];
            }
        }
        if (!draft) {
            if (rejected) {
                rec.advisor_status = "rejected: " + kinds(*rejected);
            } else if (auto it = request_errors.find(rec.control_id); it != request_errors.end()) {
                rec.advisor_status = "unavailable: " + it->second;
            } else if (rec.decision == decision::Decision::Add) {
                // Added controls come from the risk-gap step and are never sent for a draft.
                rec.advisor_status = "not-consulted";
            } else {
                rec.advisor_status = "absent";
            }
            continue;
        }

        auto params = rec.target_params;
        for (const auto& [k, v] : draft->target_params) {
            auto it = std::find_if(params.begin(), params.end(), [&](const auto& p) { return p.first == k; });
            if (it != params.end()) it->second = v;
        }
        const bool agree = draft->decision == rec.decision && params == rec.target_params &&
                           sorted(draft->enhancements) == sorted(rec.enhancements);

        rec.needs_clarification = draft->needs_clarification;
        rec.confidence = draft->confidence;
        if (draft->insufficiency) merge_insufficiency(rec, *draft->insufficiency);
        merge_insufficiency(rec, report->repaired_insufficiency);

        if (agree) {
            rec.rationale = draft->rationale;
            rec.citations = draft->cited_chunk_ids;
            rec.rationale_source = "advisor";
            rec.advisor_status = report->status == ValidationStatus::Repaired ? "agreed (repaired)" : "agreed";
        } else {
            decision::AlternativeProposal alt;
            alt.source = "advisor";
            alt.decision = draft->decision;
            alt.target_params = std::move(params);
            alt.enhancements = draft->enhancements;
            if (draft->compensation) {
                decision::CompensationRecord c;
                c.compensating_control = draft->compensation->compensating_control;
                c.justification = draft->compensation->justification;
                alt.compensation = std::move(c);
            }
            alt.rationale = draft->rationale;
            alt.citations = draft->cited_chunk_ids;
            alt.confidence = draft->confidence;
            rec.alternative = std::move(alt);
            rec.conflict = true;
            rec.advisor_status = report->status == ValidationStatus::Repaired ? "conflict (repaired)" : "conflict";
        }
    }

    for (std::size_t i = 0; i < drafts.size(); ++i) {
        const auto& d = drafts[i];
        if (reports[i].status == ValidationStatus::Rejected || d.decision != Decision::Add) continue;
        if (profile.find(d.control_id)) continue;
        profile.open_items.push_back({"AdvisorSuggestedAdd", d.control_id, d.rationale});
    }
    return profile;
}

ordered_json to_json(const DraftDecision& d) {
    ordered_json j;
    j["control_id"] = d.control_id;
    j["decision"] = decision::to_string(d.decision);
    j["target_params"] = decision::params_to_json(d.target_params);
    j["enhancements"] = d.enhancements;
    j["rationale"] = d.rationale;
    j["cited_chunk_ids"] = d.cited_chunk_ids;
    if (d.confidence) j["confidence"] = *d.confidence;
    if (!d.needs_clarification.empty()) j["needs_clarification"] = d.needs_clarification;
    if (d.insufficiency) j["insufficiency"] = *d.insufficiency;
    if (d.compensation) {
        j["compensation"] = {{"compensating_control", d.compensation->compensating_control},
                             {"justification", d.compensation->justification}};
    }
    return j;
}

ordered_json to_json(const ValidationReport& r) {
    ordered_json j;
    j["control_id"] = r.control_id;
    j["status"] = to_string(r.status);
    j["violations"] = ordered_json::array();
    for (const auto& v : r.violations) j["violations"].push_back({{"kind", to_string(v.kind)}, {"detail", v.detail}});
    if (!r.repaired_insufficiency.empty()) j["repaired_insufficiency"] = r.repaired_insufficiency;
    return j;
}

} // namespace tsp::advisor
