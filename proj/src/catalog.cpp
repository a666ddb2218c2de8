#include "tsp/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "tsp/error.hpp"
#include "tsp/interval.hpp"
#include "tsp/json_reader.hpp"

namespace tsp::catalog {

using json_io::ObjectReader;
using nlohmann::json;
using nlohmann::ordered_json;

double Control::mitigation_weight(ContextTag tag) const noexcept {
    for (const auto& m : mitigation_tags) {
        if (m.tag == tag) return m.weight;
    }
    return 0.0;
}

const Parameter* Control::find_param(std::string_view key) const noexcept {
    for (const auto& p : min_params) {
        if (p.key == key) return &p;
    }
    return nullptr;
}

Catalog::Catalog(std::string version, std::string source_doc_id, std::vector<Control> controls,
                 std::map<Category, std::vector<std::string>> baselines, std::map<std::string, FamilyProfile> families)
    : version_(std::move(version)),
      source_doc_id_(std::move(source_doc_id)),
      controls_(std::move(controls)),
      baselines_(std::move(baselines)),
      families_(std::move(families)) {
    for (std::size_t i = 0; i < controls_.size(); ++i) by_id_.emplace(controls_[i].id, i);
}

const Control* Catalog::find(std::string_view id) const noexcept {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &controls_[it->second];
}

const Control& Catalog::get_control(std::string_view id) const {
    if (const auto* c = find(id)) return *c;
    throw Error(ErrorCode::UnknownControl, "unknown control: " + std::string(id), {{"control_id", std::string(id)}});
}

BaselineProfile Catalog::baseline_for(Category category) const {
    BaselineProfile out;
    auto it = baselines_.find(category);
    if (it == baselines_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& id : it->second) out.push_back(get_control(id));
    return out;
}

FamilyProfile Catalog::family_profile(std::string_view family) const {
    auto it = families_.find(std::string(family));
    if (it != families_.end()) return it->second;
    return default_family_profile(family);
}

FamilyProfile default_family_profile(std::string_view family) {
    if (family == "AC") {
        return {{Objective::Confidentiality, Objective::Accountability},
                {"access"},
                {"policy-document", "configuration-snapshot", "log", "review-protocol"}};
    }
    if (family == "IR") {
        return {{Objective::Availability, Objective::Continuity, Objective::Accountability},
                {"incident"},
                {"incident-record", "policy-document", "training-report"}};
    }
    return {{}, {}, {"policy-document", "configuration-snapshot"}};
}

bool is_valid_control_id(std::string_view id) noexcept {
    static const std::regex kId(R"(^[A-Z]{2}-[0-9]+(\([0-9]+\))?$)");
    return std::regex_match(id.begin(), id.end(), kId);
}

std::string family_of(std::string_view id) { return std::string(id.substr(0, id.find('-'))); }

namespace {

ContextTag parse_tag_at(const ObjectReader& r, const json& v, const std::string& at) {
    if (!v.is_string()) r.fail(at, "expected a context tag string");
    auto tag = parse_context_tag(v.get<std::string>());
    if (!tag) r.fail(at, "unknown context tag '" + v.get<std::string>() + "'");
    return *tag;
}

Parameter parse_parameter(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    Parameter p;
    p.key = r.required_string("key");
    p.description = r.optional_string("description").value_or("");
    p.baseline_value = r.required_string("baseline_value");
    if (p.baseline_value.empty()) r.fail(r.child("baseline_value"), "baseline_value must be non-empty");
    const auto kind = r.required_string("value_kind");
    auto vk = parse_value_kind(kind);
    if (!vk) r.fail(r.child("value_kind"), "unknown value_kind '" + kind + "'");
    p.value_kind = *vk;
    if (has_interval_form(p.value_kind) && !canonical_interval_seconds(p.baseline_value)) {
        r.fail(r.child("baseline_value"), "duration/frequency value has no canonical interval form");
    }

    const auto& rules = r.array("refinement_rules", false);
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto at = ObjectReader::element(r.child("refinement_rules"), i);
        ObjectReader rr(rules[i], at);
        RefinementRule rule;
        const json* when = rr.raw("when_tag");
        if (!when) rr.fail(rr.child("when_tag"), "required string is missing");
        rule.when_tag = parse_tag_at(rr, *when, rr.child("when_tag"));
        rule.value = rr.required_string("value");
        if (rule.value.empty()) rr.fail(rr.child("value"), "value must be non-empty");
        if (has_interval_form(p.value_kind) && !canonical_interval_seconds(rule.value)) {
            rr.fail(rr.child("value"), "duration/frequency value has no canonical interval form");
        }
        rule.requires_fields = rr.string_array("requires_fields", false);
        rr.finish();
        p.refinement_rules.push_back(std::move(rule));
    }
    r.finish();
    return p;
}

Control parse_control(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    Control c;
    c.id = r.required_string("id");
    if (!is_valid_control_id(c.id)) r.fail(r.child("id"), "malformed control id '" + c.id + "'");
    c.family = family_of(c.id);
    c.name = r.required_string("name");

    const auto& params = r.array("min_params", false);
    std::set<std::string> keys;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = parse_parameter(params[i], ObjectReader::element(r.child("min_params"), i));
        if (!keys.insert(p.key).second) {
            r.fail(ObjectReader::element(r.child("min_params"), i), "duplicate parameter key '" + p.key + "'");
        }
        c.min_params.push_back(std::move(p));
    }

    c.enhancements = r.string_array("enhancements", false);
    c.related = r.string_array("related", false);
    for (const auto* list : {&c.enhancements, &c.related}) {
        for (const auto& id : *list) {
            if (!is_valid_control_id(id)) r.fail(path, "malformed referenced id '" + id + "'");
        }
    }

    const auto& app = r.array("applicability_tags", false);
    for (std::size_t i = 0; i < app.size(); ++i) {
        const auto at = ObjectReader::element(r.child("applicability_tags"), i);
        auto tag = parse_tag_at(r, app[i], at);
        if (std::find(c.applicability_tags.begin(), c.applicability_tags.end(), tag) != c.applicability_tags.end()) {
            r.fail(at, "duplicate applicability tag");
        }
        c.applicability_tags.push_back(tag);
    }

    const auto& mit = r.array("mitigation_tags", false);
    for (std::size_t i = 0; i < mit.size(); ++i) {
        const auto at = ObjectReader::element(r.child("mitigation_tags"), i);
        ObjectReader mr(mit[i], at);
        const json* t = mr.raw("tag");
        if (!t) mr.fail(mr.child("tag"), "required string is missing");
        MitigationTag m{parse_tag_at(mr, *t, mr.child("tag")), mr.required_number("weight")};
        if (!(m.weight > 0.0 && m.weight <= 1.0)) mr.fail(mr.child("weight"), "weight must be in (0,1]");
        if (c.mitigation_weight(m.tag) > 0.0) mr.fail(at, "duplicate mitigation tag");
        mr.finish();
        c.mitigation_tags.push_back(m);
    }
    r.finish();
    return c;
}

std::map<std::string, FamilyProfile> parse_families(const json& j, const std::string& path) {
    std::map<std::string, FamilyProfile> out;
    for (const auto& [family, body] : j.items()) {
        const auto at = path + "." + family;
        if (family.size() != 2 || !std::isupper(static_cast<unsigned char>(family[0])) ||
            !std::isupper(static_cast<unsigned char>(family[1]))) {
            json_io::fail(ErrorCode::SchemaError, at, "family code must be two uppercase letters");
        }
        ObjectReader r(body, at);
        FamilyProfile fp = default_family_profile(family);
        if (r.raw("objectives")) {
            fp.objectives.clear();
            for (const auto& o : r.string_array("objectives", true)) {
                auto obj = parse_objective(o);
                if (!obj) r.fail(r.child("objectives"), "unknown objective '" + o + "'");
                fp.objectives.push_back(*obj);
            }
        }
        if (r.raw("owner_keywords")) fp.owner_keywords = r.string_array("owner_keywords", true);
        if (r.raw("artifacts")) {
            fp.artifacts = r.string_array("artifacts", true);
            if (fp.artifacts.empty()) r.fail(r.child("artifacts"), "at least one artifact kind is required");
        }
        r.finish();
        out.emplace(family, std::move(fp));
    }
    return out;
}

void check_reference(const std::set<std::string>& ids, const std::string& id, const std::string& at) {
    if (!ids.contains(id)) {
        throw Error(ErrorCode::DanglingReference, at + ": '" + id + "' does not resolve in the catalog",
                    {{"path", at}, {"control_id", id}});
    }
}

} // namespace

Catalog parse_catalog(std::string_view raw) {
    const json doc = json_io::parse(raw);
    ObjectReader r(doc, "$");
    auto version = r.required_string("version");
    auto source_doc_id = r.required_string("source_doc_id");

    const auto& arr = r.array("controls", true);
    if (arr.empty()) r.fail(r.child("controls"), "catalog must define at least one control");
    std::vector<Control> controls;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        auto c = parse_control(arr[i], ObjectReader::element(r.child("controls"), i));
        if (!ids.insert(c.id).second) {
            r.fail(ObjectReader::element(r.child("controls"), i), "duplicate control id '" + c.id + "'");
        }
        controls.push_back(std::move(c));
    }

    const json* bl = r.object("baselines", true);
    ObjectReader br(*bl, r.child("baselines"));
    std::map<Category, std::vector<std::string>> baselines;
    for (auto cat : kAllCategories) {
        const std::string name(to_string(cat));
        auto list = br.string_array(name, true);
        if (list.empty()) br.fail(br.child(name), "baseline must be non-empty");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto at = ObjectReader::element(br.child(name), i);
            if (!seen.insert(list[i]).second) br.fail(at, "duplicate baseline entry '" + list[i] + "'");
            check_reference(ids, list[i], at);
        }
        baselines.emplace(cat, std::move(list));
    }
    br.finish();

    std::map<std::string, FamilyProfile> families;
    if (const json* fam = r.object("families", false)) families = parse_families(*fam, r.child("families"));
    r.finish();

    for (std::size_t i = 0; i < controls.size(); ++i) {
        const auto base = ObjectReader::element("$.controls", i);
        for (std::size_t k = 0; k < controls[i].enhancements.size(); ++k) {
            check_reference(ids, controls[i].enhancements[k], ObjectReader::element(base + ".enhancements", k));
        }
        for (std::size_t k = 0; k < controls[i].related.size(); ++k) {
            check_reference(ids, controls[i].related[k], ObjectReader::element(base + ".related", k));
        }
    }

    for (std::size_t i = 0; i + 1 < kAllCategories.size(); ++i) {
        const auto& lower = baselines.at(kAllCategories[i]);
        const std::set<std::string> upper(baselines.at(kAllCategories[i + 1]).begin(),
                                          baselines.at(kAllCategories[i + 1]).end());
        for (const auto& id : lower) {
            if (!upper.contains(id)) {
                throw Error(ErrorCode::BaselineNotMonotone,
                            "'" + id + "' is in the " + std::string(to_string(kAllCategories[i])) +
                                " baseline but not in " + std::string(to_string(kAllCategories[i + 1])),
                            {{"control_id", id}});
            }
        }
    }

    return Catalog(std::move(version), std::move(source_doc_id), std::move(controls), std::move(baselines),
                   std::move(families));
}

ordered_json to_json(const Control& c) {
    ordered_json j;
    j["id"] = c.id;
    j["name"] = c.name;
    j["min_params"] = ordered_json::array();
    for (const auto& p : c.min_params) {
        ordered_json pj;
        pj["key"] = p.key;
        pj["description"] = p.description;
        pj["baseline_value"] = p.baseline_value;
        pj["value_kind"] = to_string(p.value_kind);
        pj["refinement_rules"] = ordered_json::array();
        for (const auto& rule : p.refinement_rules) {
            ordered_json rj;
            rj["when_tag"] = to_string(rule.when_tag);
            rj["value"] = rule.value;
            if (!rule.requires_fields.empty()) rj["requires_fields"] = rule.requires_fields;
            pj["refinement_rules"].push_back(std::move(rj));
        }
        j["min_params"].push_back(std::move(pj));
    }
    j["enhancements"] = c.enhancements;
    j["related"] = c.related;
    j["applicability_tags"] = ordered_json::array();
    for (auto t : c.applicability_tags) j["applicability_tags"].push_back(to_string(t));
    j["mitigation_tags"] = ordered_json::array();
    for (const auto& m : c.mitigation_tags) {
        j["mitigation_tags"].push_back({{"tag", to_string(m.tag)}, {"weight", m.weight}});
    }
    return j;
}

ordered_json to_json(const Catalog& catalog) {
    ordered_json j;
    j["version"] = catalog.version();
    j["source_doc_id"] = catalog.source_doc_id();
    j["controls"] = ordered_json::array();
    for (const auto& c : catalog.controls()) j["controls"].push_back(to_json(c));
    j["baselines"] = ordered_json::object();
    for (const auto& [cat, ids] : catalog.baselines()) j["baselines"][std::string(to_string(cat))] = ids;
    if (!catalog.families().empty()) {
        j["families"] = ordered_json::object();
        for (const auto& [family, fp] : catalog.families()) {
            ordered_json fj;
            fj["objectives"] = ordered_json::array();
            for (auto o : fp.objectives) fj["objectives"].push_back(to_string(o));
            fj["owner_keywords"] = fp.owner_keywords;
            fj["artifacts"] = fp.artifacts;
            j["families"][family] = std::move(fj);
        }
    }
    return j;
}

std::string serialize_catalog(const Catalog& catalog) { return to_json(catalog).dump(2); }

} // namespace tsp::catalog
