#include "tsp/matrix.hpp"

#include <algorithm>
#include <set>

#include "tsp/error.hpp"

namespace tsp::matrix {

using catalog::Control;
using nlohmann::ordered_json;
using passport::SystemModel;

std::string_view to_string(Adequacy a) noexcept {
    switch (a) {
    case Adequacy::Sufficient: return "sufficient";
    case Adequacy::Insufficient: return "insufficient";
    case Adequacy::Unknown: return "unknown";
    }
    return "unknown";
}

void Thresholds::validate() const {
    const std::pair<const char*, double> values[] = {
        {"relevance", relevance}, {"risk", risk}, {"equivalence", equivalence}, {"gap_coverage", gap_coverage}};
    for (const auto& [name, v] : values) {
        if (!(v > 0.0 && v < 1.0)) {
            throw Error(ErrorCode::ConfigError, std::string("threshold '") + name + "' must lie in (0,1)",
                        {{"threshold", name}, {"value", v}});
        }
    }
}

bool MatrixRow::has_active_tag(ContextTag t) const noexcept {
    return std::find(context.tags.begin(), context.tags.end(), t) != context.tags.end();
}

double relevance(const Control& control, const SystemModel& model) {
    if (control.applicability_tags.empty()) return 1.0;
    std::size_t hits = 0;
    for (auto t : control.applicability_tags) {
        if (model.has_tag(t)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(control.applicability_tags.size());
}

Adequacy adequacy(std::span<const catalog::Parameter> min_params, const SystemModel& model,
                  std::span<const std::string> gaps) {
    bool any_rule = false;
    for (const auto& p : min_params) any_rule = any_rule || !p.refinement_rules.empty();
    if (!any_rule) return Adequacy::Sufficient;
    if (!gaps.empty()) return Adequacy::Unknown;
    for (const auto& p : min_params) {
        for (const auto& rule : p.refinement_rules) {
            if (model.has_tag(rule.when_tag)) return Adequacy::Insufficient;
        }
    }
    return Adequacy::Sufficient;
}

double risk_score(const Control& control, const SystemModel& model, Category category) {
    // Tenths keep the threshold comparison exact: 0.5 + 2 * 0.1 must equal 0.7.
    int tenths = category == Category::Low ? 3 : category == Category::Moderate ? 5 : 7;
    for (const auto& m : control.mitigation_tags) {
        if (model.has_tag(m.tag)) ++tenths;
    }
    return static_cast<double>(std::clamp(tenths, 0, 10)) / 10.0;
}

namespace {

RowContext build_context(const Control& control, const SystemModel& model) {
    std::set<ContextTag> referenced(control.applicability_tags.begin(), control.applicability_tags.end());
    std::set<std::string> fields;
    for (const auto& p : control.min_params) {
        for (const auto& rule : p.refinement_rules) {
            referenced.insert(rule.when_tag);
            for (const auto& f : rule.requires_fields) {
                if (passport::field_is_filled(model, f)) fields.insert(f);
            }
        }
    }
    for (const auto& m : control.mitigation_tags) referenced.insert(m.tag);

    RowContext ctx;
    for (auto t : referenced) {
        if (!model.has_tag(t)) continue;
        ctx.tags.push_back(t);
        for (const auto& f : passport::tag_source_fields(t)) {
            if (passport::field_is_filled(model, f)) fields.insert(f);
        }
    }
    for (const auto& m : control.mitigation_tags) {
        if (model.has_tag(m.tag)) ctx.risk_factors.push_back(m.tag);
    }
    ctx.fields.assign(fields.begin(), fields.end());
    return ctx;
}

} // namespace

WorkingMatrix expand_baseline(const catalog::BaselineProfile& baseline, const SystemModel& model,
                              const profiling::RequirementSet& reqs, Category category,
                              const Thresholds& thresholds, const catalog::Catalog& catalog) {
    thresholds.validate();
    WorkingMatrix w;
    w.thresholds = thresholds;
    w.rows.reserve(baseline.size());

    for (const auto& control : baseline) {
        MatrixRow row;
        row.control = control;
        row.min_params = control.min_params;
        row.context = build_context(control, model);

        const auto objectives = catalog.family_profile(control.family).objectives;
        for (const auto& r : reqs.requirements()) {
            if (std::find(objectives.begin(), objectives.end(), r.objective) != objectives.end()) {
                row.requirements.push_back(r);
            }
        }

        row.relevance = relevance(control, model);
        row.risk = risk_score(control, model, category);
        row.gaps = passport::control_gaps(control, model);
        row.adequacy = adequacy(row.min_params, model, row.gaps);
        if (row.adequacy != Adequacy::Unknown) row.gaps.clear();

        if (const auto* decl = model.find_infeasible(control.id)) {
            row.infeasible = true;
            row.infeasible_reason = decl->reason;
            row.declared_measure = decl->compensating_measure;
        }

        for (const auto& eid : control.enhancements) {
            const auto& enh = catalog.get_control(eid);
            if (relevance(enh, model) >= thresholds.relevance) row.candidate_enhancements.push_back(eid);
        }
        w.rows.push_back(std::move(row));
    }

    for (const auto& decl : model.infeasible_controls) {
        if (!catalog.contains(decl.control_id)) {
            w.warnings.push_back("UnknownControl: infeasibility declared for '" + decl.control_id +
                                 "', which the catalog does not define");
        }
    }
    return w;
}

ordered_json to_json(const MatrixRow& row) {
    ordered_json j;
    j["control_id"] = row.control.id;
    j["name"] = row.control.name;
    j["min_params"] = ordered_json::array();
    for (const auto& p : row.min_params) {
        j["min_params"].push_back({{"key", p.key}, {"baseline_value", p.baseline_value},
                                   {"value_kind", tsp::to_string(p.value_kind)}});
    }
    ordered_json ctx;
    ctx["tags"] = ordered_json::array();
    for (auto t : row.context.tags) ctx["tags"].push_back(tsp::to_string(t));
    ctx["fields"] = row.context.fields;
    ctx["risk_factors"] = ordered_json::array();
    for (auto t : row.context.risk_factors) ctx["risk_factors"].push_back(tsp::to_string(t));
    j["context"] = std::move(ctx);
    j["requirements"] = ordered_json::array();
    for (const auto& r : row.requirements) j["requirements"].push_back(profiling::to_json(r));
    j["risk"] = row.risk;
    j["relevance"] = row.relevance;
    j["adequacy"] = to_string(row.adequacy);
    j["gaps"] = row.gaps;
    j["infeasible"] = row.infeasible;
    if (row.infeasible) j["infeasible_reason"] = row.infeasible_reason;
    j["candidate_enhancements"] = row.candidate_enhancements;
    return j;
}

ordered_json to_json(const WorkingMatrix& w) {
    ordered_json j;
    j["thresholds"] = {{"relevance", w.thresholds.relevance},
                       {"risk", w.thresholds.risk},
                       {"equivalence", w.thresholds.equivalence},
                       {"gap_coverage", w.thresholds.gap_coverage}};
    j["rows"] = ordered_json::array();
    for (const auto& r : w.rows) j["rows"].push_back(to_json(r));
    j["warnings"] = w.warnings;
    return j;
}

} // namespace tsp::matrix
