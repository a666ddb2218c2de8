#include "tsp/decision.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>

#include "tsp/error.hpp"
#include "tsp/interval.hpp"

namespace tsp::decision {

using catalog::Control;
using matrix::Adequacy;
using matrix::MatrixRow;
using matrix::Thresholds;
using passport::SystemModel;

std::string_view to_string(Decision d) noexcept {
    switch (d) {
    case Decision::Keep: return "Keep";
    case Decision::Refine: return "Refine";
    case Decision::Enhance: return "Enhance";
    case Decision::Add: return "Add";
    case Decision::Compensate: return "Compensate";
    }
    return "Keep";
}

std::optional<Decision> parse_decision(std::string_view s) noexcept {
    for (auto d : kAllDecisions) {
        if (to_string(d) == s) return d;
    }
    return std::nullopt;
}

std::string_view to_string(ProfileStatus s) noexcept {
    switch (s) {
    case ProfileStatus::Draft: return "draft";
    case ProfileStatus::UnderReview: return "under_review";
    case ProfileStatus::Approved: return "approved";
    }
    return "draft";
}

const std::string* find_param(const ParamMap& params, std::string_view key) noexcept {
    for (const auto& [k, v] : params) {
        if (k == key) return &v;
    }
    return nullptr;
}

bool RiskGap::uncovered(ContextTag t) const noexcept {
    return std::any_of(uncovered_tags.begin(), uncovered_tags.end(), [t](const auto& u) { return u.tag == t; });
}

TargetControlRecord* TargetProfile::find(std::string_view control_id) noexcept {
    for (auto& r : records) {
        if (r.control_id == control_id) return &r;
    }
    return nullptr;
}

const TargetControlRecord* TargetProfile::find(std::string_view control_id) const noexcept {
    for (const auto& r : records) {
        if (r.control_id == control_id) return &r;
    }
    return nullptr;
}

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string join_tags(const std::vector<ContextTag>& tags) {
    std::vector<std::string> names;
    for (auto t : tags) names.emplace_back(to_string(t));
    return join(names);
}

} // namespace

Decision decide(const MatrixRow& row, const Thresholds& t) {
    if (row.infeasible) return Decision::Compensate;
    const bool relevant = row.relevance >= t.relevance;
    if (relevant && row.adequacy == Adequacy::Insufficient) return Decision::Refine;
    if (relevant && row.risk > t.risk && !row.candidate_enhancements.empty()) return Decision::Enhance;
    return Decision::Keep;
}

ParamMap instantiate_params(const MatrixRow& row, Decision decision) {
    if (decision == Decision::Add) {
        throw Error(ErrorCode::ConfigError, "parameters of added controls are not instantiated from a matrix row");
    }
    ParamMap out;
    out.reserve(row.min_params.size());
    for (const auto& p : row.min_params) {
        std::string value = p.baseline_value;
        if (decision != Decision::Keep) {
            for (const auto& rule : p.refinement_rules) {
                // A rule whose required passport fields are missing cannot be judged, so it
                // never fires; the record carries the gap instead.
                const bool blocked = std::any_of(rule.requires_fields.begin(), rule.requires_fields.end(),
                                                 [&](const std::string& f) {
                                                     return std::find(row.gaps.begin(), row.gaps.end(), f) !=
                                                            row.gaps.end();
                                                 });
                if (row.has_active_tag(rule.when_tag) && !blocked) {
                    ensure_not_relaxed(row.control.id, p.key, p.value_kind, p.baseline_value, rule.value);
                    value = rule.value;
                    break;
                }
            }
        }
        out.emplace_back(p.key, std::move(value));
    }
    return out;
}

std::vector<std::string> select_enhancements(const MatrixRow& row, Decision decision, const Thresholds& t,
                                             const catalog::Catalog& catalog, const RiskGap& gap) {
    if (decision == Decision::Compensate || decision == Decision::Add) return {};
    const bool escalated = (decision == Decision::Refine || decision == Decision::Enhance) &&
                           row.relevance >= t.relevance && row.risk > t.risk;
    std::vector<std::string> out;
    for (const auto& id : row.candidate_enhancements) {
        bool take = escalated;
        if (!take) {
            const auto& enh = catalog.get_control(id);
            take = std::any_of(enh.mitigation_tags.begin(), enh.mitigation_tags.end(),
                               [&](const auto& m) { return gap.uncovered(m.tag); });
        }
        if (take) out.push_back(id);
    }
    return out;
}

RiskGap risk_gap(const SystemModel& model, const std::vector<Control>& controls, double coverage_threshold) {
    RiskGap gap;
    for (auto tag : model.context_tags) {
        double cov = 0.0;
        for (const auto& c : controls) cov += c.mitigation_weight(tag);
        cov = std::min(cov, 1.0);
        if (cov < coverage_threshold) {
            gap.uncovered_tags.push_back({tag, cov});
            gap.value += 1.0 - cov;
        }
    }
    return gap;
}

RiskGap risk_gap(const SystemModel& model, const matrix::WorkingMatrix& matrix) {
    std::vector<Control> feasible;
    for (const auto& row : matrix.rows) {
        if (!row.infeasible) feasible.push_back(row.control);
    }
    return risk_gap(model, feasible, matrix.thresholds.gap_coverage);
}

ExtraControls add_extra_controls(const RiskGap& gap, const catalog::Catalog& catalog,
                                 const std::set<std::string>& excluded, const SystemModel& model) {
    ExtraControls out;
    std::map<std::string, std::vector<UncoveredTag>> chosen;
    for (const auto& u : gap.uncovered_tags) {
        const Control* best = nullptr;
        double best_w = 0.0;
        for (const auto& c : catalog.controls()) {
            if (c.is_enhancement() || excluded.contains(c.id) || model.find_infeasible(c.id)) continue;
            const double w = c.mitigation_weight(u.tag);
            if (w <= 0.0) continue;
            if (!best || w > best_w || (w == best_w && c.id < best->id)) {
                best = &c;
                best_w = w;
            }
        }
        if (!best) {
            out.open_items.push_back({"NoCoveringControl", std::string(to_string(u.tag)),
                                      "no catalog control outside the profile mitigates this risk factor"});
            continue;
        }
        chosen[best->id].push_back(u);
    }

    for (const auto& [id, tags] : chosen) {
        const auto& c = catalog.get_control(id);
        TargetControlRecord rec;
        rec.control_id = id;
        rec.decision = Decision::Add;
        for (const auto& p : c.min_params) rec.target_params.emplace_back(p.key, p.baseline_value);
        std::vector<std::string> parts;
        for (const auto& u : tags) {
            parts.push_back(std::string(to_string(u.tag)) + " (baseline coverage " + fmt2(u.coverage) + ", " + id +
                            " weight " + fmt2(c.mitigation_weight(u.tag)) + ")");
        }
        rec.rationale = "Add [risk-gap]: uncovered risk factor " + join(parts, "; ") +
                        "; highest-weight catalog control outside the profile.";
        out.records.push_back(std::move(rec));
    }
    return out;
}

double mitigation_coverage(const std::vector<catalog::MitigationTag>& original,
                           const std::vector<catalog::MitigationTag>& candidate) {
    double total = 0.0;
    double covered = 0.0;
    for (const auto& o : original) {
        total += o.weight;
        for (const auto& c : candidate) {
            if (c.tag == o.tag) covered += std::min(o.weight, c.weight);
        }
    }
    return total > 0.0 ? covered / total : 0.0;
}

CompensationRecord compensate(const MatrixRow& row, const catalog::Catalog& catalog, const SystemModel& model,
                              const Thresholds& t) {
    const auto& original = row.control.mitigation_tags;
    std::string best_name;
    double best_cov = 0.0;
    bool best_is_measure = false;

    if (row.declared_measure) {
        best_cov = mitigation_coverage(original, row.declared_measure->mitigation_tags);
        if (best_cov > 0.0) {
            best_name = row.declared_measure->description;
            best_is_measure = true;
        }
    }
    for (const auto& c : catalog.controls()) {
        if (c.id == row.control.id || model.find_infeasible(c.id)) continue;
        const double cov = mitigation_coverage(original, c.mitigation_tags);
        if (cov <= 0.0) continue;
        // Strictly better wins; the declared measure keeps ties, then catalog order by id.
        if (best_name.empty() || cov > best_cov || (cov == best_cov && !best_is_measure && c.id < best_name)) {
            best_name = c.id;
            best_cov = cov;
            best_is_measure = false;
        }
    }

    CompensationRecord rec;
    rec.reason = row.infeasible_reason;
    rec.compensating_control = best_name;
    rec.coverage = best_name.empty() ? 0.0 : best_cov;
    rec.residual_risk = row.risk * (1.0 - rec.coverage);
    rec.acceptable = rec.coverage >= t.equivalence;
    if (best_name.empty()) {
        rec.justification = "No feasible catalog control or declared measure mitigates the risk factors of " +
                            row.control.id + "; residual risk stays at " + fmt2(row.risk) +
                            " and requires an expert decision.";
    } else {
        rec.justification = (best_is_measure ? "Declared measure '" + best_name + "'" : best_name) + " covers " +
                            fmt2(rec.coverage * 100.0) + "% of the mitigation weight of " + row.control.id +
                            (rec.acceptable ? " (meets the equivalence threshold " : " (below the equivalence threshold ") +
                            fmt2(t.equivalence) + ").";
    }
    return rec;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace

Accountability assign_accountability(const TargetControlRecord& record, const SystemModel& model,
                                     const catalog::Catalog& catalog) {
    if (model.admin_roles.empty()) {
        throw Error(ErrorCode::NoAdminRoles, "passport declares no administrator roles; " + record.control_id +
                                                 " cannot be assigned an accountable owner");
    }
    const auto profile = catalog.family_profile(catalog::family_of(record.control_id));
    Accountability out;
    for (const auto* roles : {&model.admin_roles, &model.user_roles}) {
        for (const auto& role : *roles) {
            const auto r = lower(role);
            for (const auto& kw : profile.owner_keywords) {
                if (!kw.empty() && r.find(lower(kw)) != std::string::npos) {
                    out.owner = role;
                    break;
                }
            }
            if (!out.owner.empty()) break;
        }
        if (!out.owner.empty()) break;
    }
    if (out.owner.empty()) out.owner = model.admin_roles.front();
    out.artifacts = profile.artifacts;
    if (out.artifacts.empty()) out.artifacts.emplace_back("policy-document");
    return out;
}

namespace {

std::string rule_clause(const MatrixRow& row, const ParamMap& params) {
    std::vector<std::string> parts;
    for (const auto& p : row.min_params) {
        for (const auto& rule : p.refinement_rules) {
            if (!row.has_active_tag(rule.when_tag)) continue;
            parts.push_back("rule " + p.key + "[" + std::string(to_string(rule.when_tag)) + "] sets '" +
                            *find_param(params, p.key) + "' (baseline '" + p.baseline_value + "')");
            break;
        }
    }
    return join(parts, "; ");
}

std::string explain(const MatrixRow& row, Decision d, const ParamMap& params, const std::vector<std::string>& enh,
                    bool gap_driven, const RiskGap& gap, const Thresholds& t,
                    const std::optional<CompensationRecord>& comp) {
    const std::string rel = "relevance " + fmt2(row.relevance);
    const std::string risk = "risk " + fmt2(row.risk);
    std::string out;
    switch (d) {
    case Decision::Compensate:
        out = "Compensate [infeasible]: control declared infeasible (" + row.infeasible_reason + "). " +
              comp->justification;
        break;
    case Decision::Refine:
        out = "Refine [adequacy]: " + rel + " >= theta_r " + fmt2(t.relevance) +
              " and baseline parameters are insufficient; " + rule_clause(row, params) + ".";
        break;
    case Decision::Enhance:
        if (gap_driven) {
            out = "Enhance [risk-gap]: baseline parameters retained; enhancements close uncovered risk factors.";
        } else {
            out = "Enhance [escalation]: " + rel + " >= theta_r " + fmt2(t.relevance) + " and " + risk +
                  " > theta_risk " + fmt2(t.risk) + " (factors: " + join_tags(row.context.risk_factors) + ").";
        }
        break;
    case Decision::Keep:
        if (row.adequacy == Adequacy::Unknown) {
            out = "Keep [insufficient-information]: adequacy unknown because the passport lacks " +
                  join(row.gaps) + "; baseline parameters retained pending clarification.";
        } else if (row.relevance < t.relevance) {
            out = "Keep [mandatory-minimum]: " + rel + " < theta_r " + fmt2(t.relevance) +
                  "; baseline controls are never dropped, minimum parameters retained.";
        } else {
            out = "Keep [baseline-adequate]: " + rel + " >= theta_r " + fmt2(t.relevance) +
                  ", adequacy sufficient, " + risk + " <= theta_risk " + fmt2(t.risk) +
                  "; baseline parameters retained.";
            if (row.risk > t.risk) {
                out = "Keep [no-enhancement-available]: " + rel + " >= theta_r " + fmt2(t.relevance) +
                      ", adequacy sufficient, " + risk + " > theta_risk " + fmt2(t.risk) +
                      " but no applicable enhancement exists; baseline parameters retained.";
            }
        }
        break;
    case Decision::Add:
        break;
    }
    if (row.adequacy == Adequacy::Unknown && d != Decision::Keep) {
        out += " Adequacy unknown [insufficient-information]: the passport lacks " + join(row.gaps) +
               "; rules depending on it were not applied.";
    }
    if (!enh.empty() && d != Decision::Enhance) {
        out += " Enhancements " + join(enh) + " selected: " + risk + " > theta_risk " + fmt2(t.risk) + ".";
    } else if (!enh.empty()) {
        out += " Enhancements: " + join(enh) + ".";
    }
    if (gap_driven) {
        std::vector<std::string> tags;
        for (const auto& u : gap.uncovered_tags) tags.emplace_back(to_string(u.tag));
        out += " [risk-gap] uncovered factors: " + join(tags) + ".";
    }
    return out;
}

} // namespace

TargetProfile build_rule_draft(const matrix::WorkingMatrix& matrix, const SystemModel& model,
                               const profiling::RequirementSet& reqs, const catalog::Catalog& catalog,
                               Category category, Provenance provenance) {
    const auto& t = matrix.thresholds;
    TargetProfile profile;
    profile.system_name = model.system_name;
    profile.category = category;
    profile.requirements = reqs;
    provenance.thresholds = t;
    profile.provenance = std::move(provenance);

    profile.baseline_gap = risk_gap(model, matrix);

    for (const auto& row : matrix.rows) {
        TargetControlRecord rec;
        rec.control_id = row.control.id;
        Decision d = decide(row, t);
        auto enh = select_enhancements(row, d, t, catalog, profile.baseline_gap);
        const bool escalated = (d == Decision::Refine || d == Decision::Enhance) && row.risk > t.risk &&
                               row.relevance >= t.relevance;
        const bool gap_driven = !enh.empty() && !escalated;
        if (d == Decision::Keep && !enh.empty()) d = Decision::Enhance;

        rec.decision = d;
        rec.target_params = instantiate_params(row, d);
        rec.enhancements = std::move(enh);
        if (d == Decision::Compensate) rec.compensation = compensate(row, catalog, model, t);
        if (row.adequacy == Adequacy::Unknown) rec.insufficiency = row.gaps;
        rec.rationale = explain(row, d, rec.target_params, rec.enhancements, gap_driven, profile.baseline_gap, t,
                                rec.compensation);
        profile.records.push_back(std::move(rec));
    }

    std::set<std::string> in_profile;
    std::vector<Control> covering;
    for (const auto& row : matrix.rows) {
        in_profile.insert(row.control.id);
        if (!row.infeasible) covering.push_back(row.control);
    }
    for (const auto& rec : profile.records) {
        for (const auto& e : rec.enhancements) {
            if (std::find(profile.added_enhancements.begin(), profile.added_enhancements.end(), e) ==
                profile.added_enhancements.end()) {
                profile.added_enhancements.push_back(e);
                covering.push_back(catalog.get_control(e));
                in_profile.insert(e);
            }
        }
    }

    profile.residual_gap = risk_gap(model, covering, t.gap_coverage);
    auto extra = add_extra_controls(profile.residual_gap, catalog, in_profile, model);
    for (auto& rec : extra.records) {
        profile.added_controls.push_back(rec.control_id);
        profile.records.push_back(std::move(rec));
    }
    profile.open_items = std::move(extra.open_items);
    for (const auto& w : matrix.warnings) profile.open_items.push_back({"UnknownControl", "", w});

    for (auto& rec : profile.records) {
        auto acc = assign_accountability(rec, model, catalog);
        rec.owner = std::move(acc.owner);
        rec.artifacts = std::move(acc.artifacts);
    }
    return profile;
}

} // namespace tsp::decision
