#include "tsp/profiling.hpp"

#include <algorithm>
#include <cctype>

namespace tsp::profiling {

using nlohmann::ordered_json;
using passport::SystemModel;

bool RequirementSet::add(Requirement req) {
    for (auto& existing : items_) {
        if (existing.objective == req.objective && existing.statement == req.statement) {
            for (auto& f : req.source_fields) {
                if (std::find(existing.source_fields.begin(), existing.source_fields.end(), f) ==
                    existing.source_fields.end()) {
                    existing.source_fields.push_back(std::move(f));
                }
            }
            return false;
        }
    }
    items_.push_back(std::move(req));
    return true;
}

std::vector<Requirement> RequirementSet::by_objective(Objective o) const {
    std::vector<Requirement> out;
    std::copy_if(items_.begin(), items_.end(), std::back_inserter(out),
                 [o](const auto& r) { return r.objective == o; });
    return out;
}

bool RequirementSet::covers(Objective o) const noexcept {
    return std::any_of(items_.begin(), items_.end(), [o](const auto& r) { return r.objective == o; });
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string lower(Objective o) { return lower(to_string(o)); }

std::string field(std::string_view base, std::size_t i, std::string_view tail = {}) {
    std::string out = std::string(base) + "[" + std::to_string(i) + "]";
    if (!tail.empty()) out += "." + std::string(tail);
    return out;
}

} // namespace

RequirementSet derive_requirements(const SystemModel& m) {
    RequirementSet q;

    for (std::size_t i = 0; i < m.data_categories.size(); ++i) {
        const auto& dc = m.data_categories[i];
        const std::pair<Objective, Category> levels[] = {
            {Objective::Confidentiality, dc.sensitivity.confidentiality},
            {Objective::Integrity, dc.sensitivity.integrity},
            {Objective::Availability, dc.sensitivity.availability},
        };
        for (const auto& [obj, level] : levels) {
            q.add({obj,
                   "Protect " + lower(obj) + " of '" + dc.name + "' data at " + std::string(to_string(level)) +
                       " impact",
                   {field("data_categories", i, "sensitivity." + lower(obj))}});
        }
    }

    std::vector<std::string> accountability_sources;
    if (m.has_tag(ContextTag::PrivilegedAccess)) accountability_sources.emplace_back("admin_roles");
    if (m.has_tag(ContextTag::ExternalInterconnect)) accountability_sources.emplace_back("integrations");
    if (!accountability_sources.empty()) {
        q.add({Objective::Accountability,
               "Attribute privileged and cross-system actions to accountable identities",
               accountability_sources});
    }

    for (std::size_t i = 0; i < m.data_categories.size(); ++i) {
        const auto& dc = m.data_categories[i];
        std::vector<std::string> sources;
        if (dc.personal) sources.push_back(field("data_categories", i, "personal"));
        if (dc.legal_basis && lower(*dc.legal_basis).find("personal") != std::string::npos) {
            sources.push_back(field("data_categories", i, "legal_basis"));
        }
        if (!sources.empty()) {
            q.add({Objective::Privacy, "Process personal data in '" + dc.name + "' only within its legal basis",
                   sources});
        }
    }

    for (std::size_t i = 0; i < m.missions.size(); ++i) {
        if (!m.missions[i].critical) continue;
        const auto src = field("missions", i, "critical");
        q.add({Objective::Continuity, "Sustain mission '" + m.missions[i].description + "' through disruption",
               {src}});
        q.add({Objective::Availability,
               "Keep services supporting mission '" + m.missions[i].description + "' available", {src}});
    }
    for (std::size_t i = 0; i < m.critical_assets.size(); ++i) {
        q.add({Objective::Continuity, "Recover critical asset '" + m.critical_assets[i].name + "' after failure",
               {field("critical_assets", i)}});
    }
    return q;
}

Category categorize(const SystemModel& m) {
    Category out = Category::Low;
    for (const auto& dc : m.data_categories) out = std::max(out, dc.sensitivity.high_water_mark());
    return out;
}

catalog::BaselineProfile select_baseline(const SystemModel& model, const catalog::Catalog& catalog) {
    return catalog.baseline_for(categorize(model));
}

ordered_json to_json(const Requirement& r) {
    ordered_json j;
    j["objective"] = to_string(r.objective);
    j["statement"] = r.statement;
    j["source_fields"] = r.source_fields;
    return j;
}

ordered_json to_json(const RequirementSet& set) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : set.requirements()) arr.push_back(to_json(r));
    return arr;
}

} // namespace tsp::profiling
