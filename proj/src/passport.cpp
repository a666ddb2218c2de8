#include "tsp/passport.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "tsp/digest.hpp"
#include "tsp/error.hpp"
#include "tsp/json_reader.hpp"

namespace tsp::passport {

using json_io::ObjectReader;
using nlohmann::json;
using nlohmann::ordered_json;

Category ImpactLevels::high_water_mark() const noexcept {
    return std::max({confidentiality, integrity, availability});
}

const InfeasibleDeclaration* SystemModel::find_infeasible(std::string_view control_id) const noexcept {
    for (const auto& d : infeasible_controls) {
        if (d.control_id == control_id) return &d;
    }
    return nullptr;
}

std::set<ContextTag> derive_context_tags(const SystemModel& m) {
    std::set<ContextTag> tags;
    if (m.deployment) {
        const auto& d = *m.deployment;
        if (d.remote_access) tags.insert(ContextTag::RemoteAccess);
        if (d.cloud) tags.insert(ContextTag::CloudDeployment);
        if (d.mobile_devices) tags.insert(ContextTag::Mobile);
        if (d.public_facing) tags.insert(ContextTag::PublicFacing);
        for (auto f : d.flags) tags.insert(f);
    }
    if (std::any_of(m.external_services.begin(), m.external_services.end(),
                    [](const auto& e) { return e.audience == Audience::Public; })) {
        tags.insert(ContextTag::PublicFacing);
    }
    if (!m.admin_roles.empty()) tags.insert(ContextTag::PrivilegedAccess);
    if (std::any_of(m.data_categories.begin(), m.data_categories.end(), [](const auto& c) {
            return c.sensitivity.high_water_mark() == Category::High;
        })) {
        tags.insert(ContextTag::SensitiveData);
    }
    if (!m.integrations.empty()) tags.insert(ContextTag::ExternalInterconnect);
    if (std::any_of(m.missions.begin(), m.missions.end(), [](const auto& x) { return x.critical; })) {
        tags.insert(ContextTag::HighAvailabilityMission);
    }
    return tags;
}

namespace {

std::string_view to_string(Audience a) {
    switch (a) {
    case Audience::Public: return "public";
    case Audience::Partner: return "partner";
    case Audience::Internal: return "internal";
    }
    return "internal";
}

Category read_level(ObjectReader& r, std::string_view key) {
    const auto s = r.required_string(key);
    auto c = parse_category(s);
    if (!c) r.fail(r.child(key), "expected Low, Moderate or High, got '" + s + "'");
    return *c;
}

std::vector<catalog::MitigationTag> read_mitigation(ObjectReader& r) {
    std::vector<catalog::MitigationTag> out;
    const auto& arr = r.array("mitigation_tags", false);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        ObjectReader mr(arr[i], ObjectReader::element(r.child("mitigation_tags"), i));
        const auto name = mr.required_string("tag");
        auto tag = parse_context_tag(name);
        if (!tag) mr.fail(mr.child("tag"), "unknown context tag '" + name + "'");
        const double w = mr.required_number("weight");
        if (!(w > 0.0 && w <= 1.0)) mr.fail(mr.child("weight"), "weight must be in (0,1]");
        mr.finish();
        out.push_back({*tag, w});
    }
    return out;
}

template <typename T, typename F>
std::vector<T> read_objects(ObjectReader& r, std::string_view key, F&& read_one) {
    std::vector<T> out;
    const auto& arr = r.array(key, false);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        ObjectReader er(arr[i], ObjectReader::element(r.child(key), i));
        out.push_back(read_one(er));
        er.finish();
    }
    return out;
}

} // namespace

SystemModel parse_passport(std::string_view raw) {
    const json doc = json_io::parse(raw);
    ObjectReader r(doc, "$");
    SystemModel m;
    m.system_name = r.optional_string("system_name").value_or("");

    m.components = read_objects<ArchComponent>(r, "components", [](ObjectReader& e) {
        return ArchComponent{e.required_string("name"), e.optional_string("kind").value_or(""),
                             e.optional_string("description").value_or("")};
    });

    if (const json* dc = r.raw("data_categories"); !dc || dc->is_null() || (dc->is_array() && dc->empty())) {
        throw Error(ErrorCode::EmptyDataCategories, "passport must declare at least one data category",
                    {{"path", "$.data_categories"}});
    }
    m.data_categories = read_objects<DataCategory>(r, "data_categories", [](ObjectReader& e) {
        DataCategory c;
        c.name = e.required_string("name");
        const json* s = e.object("sensitivity", true);
        ObjectReader sr(*s, e.child("sensitivity"));
        c.sensitivity.confidentiality = read_level(sr, "confidentiality");
        c.sensitivity.integrity = read_level(sr, "integrity");
        c.sensitivity.availability = read_level(sr, "availability");
        sr.finish();
        c.legal_basis = e.optional_string("legal_basis");
        c.personal = e.optional_bool("personal", false);
        return c;
    });

    m.user_roles = r.string_array("user_roles", false);
    m.admin_roles = r.string_array("admin_roles", false);

    m.integrations = read_objects<Integration>(r, "integrations", [](ObjectReader& e) {
        return Integration{e.required_string("name"), e.optional_string("direction").value_or(""),
                           e.optional_string("description").value_or("")};
    });

    m.external_services = read_objects<ExposedInterface>(r, "external_services", [](ObjectReader& e) {
        ExposedInterface x;
        x.name = e.required_string("name");
        const auto aud = e.required_string("audience");
        if (aud == "public") x.audience = Audience::Public;
        else if (aud == "partner") x.audience = Audience::Partner;
        else if (aud == "internal") x.audience = Audience::Internal;
        else e.fail(e.child("audience"), "expected public, partner or internal");
        x.protocol = e.optional_string("protocol").value_or("");
        return x;
    });

    if (const json* d = r.object("deployment", false)) {
        ObjectReader dr(*d, r.child("deployment"));
        DeploymentTraits t;
        t.cloud = dr.optional_bool("cloud", false);
        t.mobile_devices = dr.optional_bool("mobile_devices", false);
        t.remote_access = dr.optional_bool("remote_access", false);
        t.public_facing = dr.optional_bool("public_facing", false);
        t.notes = dr.string_array("notes", false);
        const auto flags = dr.string_array("flags", false);
        for (std::size_t i = 0; i < flags.size(); ++i) {
            auto tag = parse_context_tag(flags[i]);
            if (!tag || (*tag != ContextTag::MultiTenant && *tag != ContextTag::UnattendedOperation)) {
                dr.fail(ObjectReader::element(dr.child("flags"), i),
                        "flag must be multi-tenant or unattended-operation");
            }
            if (std::find(t.flags.begin(), t.flags.end(), *tag) == t.flags.end()) t.flags.push_back(*tag);
        }
        dr.finish();
        m.deployment = std::move(t);
    }

    m.missions = read_objects<Mission>(r, "missions", [](ObjectReader& e) {
        return Mission{e.required_string("description"), e.optional_bool("critical", false)};
    });
    m.critical_assets = read_objects<CriticalPoint>(r, "critical_assets", [](ObjectReader& e) {
        return CriticalPoint{e.required_string("name"), e.optional_string("description").value_or("")};
    });

    m.infeasible_controls = read_objects<InfeasibleDeclaration>(r, "infeasible_controls", [](ObjectReader& e) {
        InfeasibleDeclaration d;
        d.control_id = e.required_string("control_id");
        if (!catalog::is_valid_control_id(d.control_id)) {
            e.fail(e.child("control_id"), "malformed control id '" + d.control_id + "'");
        }
        d.reason = e.required_string("reason");
        if (const json* cm = e.object("compensating_measure", false)) {
            ObjectReader cr(*cm, e.child("compensating_measure"));
            CompensatingMeasure measure;
            measure.description = cr.required_string("description");
            measure.mitigation_tags = read_mitigation(cr);
            cr.finish();
            d.compensating_measure = std::move(measure);
        }
        return d;
    });

    if (const json* p = r.object("procedures", false)) {
        for (const auto& [name, text] : p->items()) {
            if (!text.is_string()) json_io::fail(ErrorCode::SchemaError, r.child("procedures") + "." + name, "expected a string");
            m.procedures.emplace(name, text.get<std::string>());
        }
    }
    r.finish();

    m.context_tags = derive_context_tags(m);
    return m;
}

ordered_json to_json(const SystemModel& m) {
    ordered_json j;
    j["system_name"] = m.system_name;
    j["components"] = ordered_json::array();
    for (const auto& c : m.components) {
        j["components"].push_back({{"name", c.name}, {"kind", c.kind}, {"description", c.description}});
    }
    j["data_categories"] = ordered_json::array();
    for (const auto& c : m.data_categories) {
        ordered_json cj;
        cj["name"] = c.name;
        cj["sensitivity"] = {{"confidentiality", to_string(c.sensitivity.confidentiality)},
                             {"integrity", to_string(c.sensitivity.integrity)},
                             {"availability", to_string(c.sensitivity.availability)}};
        if (c.legal_basis) cj["legal_basis"] = *c.legal_basis;
        cj["personal"] = c.personal;
        j["data_categories"].push_back(std::move(cj));
    }
    j["user_roles"] = m.user_roles;
    j["admin_roles"] = m.admin_roles;
    j["integrations"] = ordered_json::array();
    for (const auto& i : m.integrations) {
        j["integrations"].push_back({{"name", i.name}, {"direction", i.direction}, {"description", i.description}});
    }
    j["external_services"] = ordered_json::array();
    for (const auto& e : m.external_services) {
        j["external_services"].push_back({{"name", e.name}, {"audience", to_string(e.audience)}, {"protocol", e.protocol}});
    }
    if (m.deployment) {
        const auto& d = *m.deployment;
        ordered_json dj;
        dj["cloud"] = d.cloud;
        dj["mobile_devices"] = d.mobile_devices;
        dj["remote_access"] = d.remote_access;
        dj["public_facing"] = d.public_facing;
        dj["notes"] = d.notes;
        dj["flags"] = ordered_json::array();
        for (auto f : d.flags) dj["flags"].push_back(tsp::to_string(f));
        j["deployment"] = std::move(dj);
    }
    j["missions"] = ordered_json::array();
    for (const auto& x : m.missions) j["missions"].push_back({{"description", x.description}, {"critical", x.critical}});
    j["critical_assets"] = ordered_json::array();
    for (const auto& a : m.critical_assets) {
        j["critical_assets"].push_back({{"name", a.name}, {"description", a.description}});
    }
    j["infeasible_controls"] = ordered_json::array();
    for (const auto& d : m.infeasible_controls) {
        ordered_json dj;
        dj["control_id"] = d.control_id;
        dj["reason"] = d.reason;
        if (d.compensating_measure) {
            ordered_json mj;
            mj["description"] = d.compensating_measure->description;
            mj["mitigation_tags"] = ordered_json::array();
            for (const auto& t : d.compensating_measure->mitigation_tags) {
                mj["mitigation_tags"].push_back({{"tag", tsp::to_string(t.tag)}, {"weight", t.weight}});
            }
            dj["compensating_measure"] = std::move(mj);
        }
        j["infeasible_controls"].push_back(std::move(dj));
    }
    j["procedures"] = ordered_json::object();
    for (const auto& [k, v] : m.procedures) j["procedures"][k] = v;
    return j;
}

std::string serialize_passport(const SystemModel& model) { return to_json(model).dump(2); }

std::string passport_digest(const SystemModel& model) { return sha256_hex(to_json(model).dump()); }

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

} // namespace

bool field_is_filled(const SystemModel& m, std::string_view path) {
    if (path == "components") return !m.components.empty();
    if (path == "data_categories") return !m.data_categories.empty();
    if (path == "user_roles") return !m.user_roles.empty();
    if (path == "admin_roles") return !m.admin_roles.empty();
    if (path == "integrations") return !m.integrations.empty();
    if (path == "external_services") return !m.external_services.empty();
    if (path == "deployment") return m.deployment.has_value();
    if (path == "missions") return !m.missions.empty();
    if (path == "critical_assets") return !m.critical_assets.empty();
    if (path == "infeasible_controls") return !m.infeasible_controls.empty();
    constexpr std::string_view kProc = "procedures.";
    if (path.starts_with(kProc)) {
        auto it = m.procedures.find(std::string(path.substr(kProc.size())));
        return it != m.procedures.end() && !is_blank(it->second);
    }
    return false;
}

std::vector<std::string> tag_source_fields(ContextTag tag) {
    switch (tag) {
    case ContextTag::PrivilegedAccess: return {"admin_roles"};
    case ContextTag::PublicFacing: return {"external_services", "deployment"};
    case ContextTag::ExternalInterconnect: return {"integrations"};
    case ContextTag::HighAvailabilityMission: return {"missions"};
    case ContextTag::SensitiveData: return {"data_categories"};
    case ContextTag::RemoteAccess:
    case ContextTag::CloudDeployment:
    case ContextTag::Mobile:
    case ContextTag::MultiTenant:
    case ContextTag::UnattendedOperation: return {"deployment"};
    }
    return {};
}

std::vector<std::string> control_gaps(const catalog::Control& control, const SystemModel& model) {
    std::set<std::string> gaps;
    for (const auto& p : control.min_params) {
        for (const auto& rule : p.refinement_rules) {
            const auto sources = tag_source_fields(rule.when_tag);
            if (std::none_of(sources.begin(), sources.end(),
                             [&](const auto& f) { return field_is_filled(model, f); })) {
                gaps.insert(sources.begin(), sources.end());
            }
            for (const auto& f : rule.requires_fields) {
                if (!field_is_filled(model, f)) gaps.insert(f);
            }
        }
    }
    return {gaps.begin(), gaps.end()};
}

CompletenessReport completeness(const SystemModel& model, const catalog::Catalog& catalog) {
    CompletenessReport report;
    std::size_t filled = 0;
    for (auto f : kWeightedFields) {
        if (field_is_filled(model, f)) ++filled;
        else report.missing_fields.emplace_back(f);
    }
    report.score = static_cast<double>(filled) / static_cast<double>(std::size(kWeightedFields));
    for (const auto& c : catalog.controls()) {
        auto gaps = control_gaps(c, model);
        if (!gaps.empty()) report.per_control_gaps.emplace(c.id, std::move(gaps));
    }
    return report;
}

ordered_json to_json(const CompletenessReport& r) {
    ordered_json j;
    j["score"] = r.score;
    j["missing_fields"] = r.missing_fields;
    j["per_control_gaps"] = ordered_json::object();
    for (const auto& [id, gaps] : r.per_control_gaps) j["per_control_gaps"][id] = gaps;
    return j;
}

} // namespace tsp::passport
