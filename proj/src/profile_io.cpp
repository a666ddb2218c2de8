#include <algorithm>
#include <cstdio>
#include <initializer_list>
#include <set>

#include "tsp/decision.hpp"
#include "tsp/digest.hpp"
#include "tsp/error.hpp"
#include "tsp/utf8.hpp"

namespace tsp::decision {

using nlohmann::ordered_json;

namespace {

ordered_json tags_json(const RiskGap& gap) {
    ordered_json j;
    j["value"] = gap.value;
    j["uncovered_tags"] = ordered_json::array();
    for (const auto& u : gap.uncovered_tags) {
        j["uncovered_tags"].push_back({{"tag", to_string(u.tag)}, {"coverage", u.coverage}});
    }
    return j;
}

ordered_json to_json(const AlternativeProposal& a) {
    ordered_json j;
    j["source"] = a.source;
    j["decision"] = to_string(a.decision);
    j["target_params"] = params_to_json(a.target_params);
    j["enhancements"] = a.enhancements;
    if (a.compensation) j["compensation"] = to_json(*a.compensation);
    j["rationale"] = a.rationale;
    j["citations"] = a.citations;
    if (a.confidence) j["confidence"] = *a.confidence;
    return j;
}

// Minimal strict reader over ordered_json; the generic reader works on unordered json and
// would lose parameter order.
class Reader {
public:
    Reader(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected object");
    }

    [[noreturn]] static void fail(const std::string& at, const std::string& what) {
        throw Error(ErrorCode::SchemaError, at + ": " + what, {{"path", at}});
    }

    const ordered_json* get(const char* key, bool required) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) {
            if (required) fail(at(key), "missing required field");
            return nullptr;
        }
        return &*it;
    }

    std::string str(const char* key, bool required = true) {
        const auto* v = get(key, required);
        if (!v) return {};
        if (!v->is_string()) fail(at(key), "expected string");
        return v->get<std::string>();
    }

    double num(const char* key) {
        const auto* v = get(key, true);
        if (!v->is_number()) fail(at(key), "expected number");
        return v->get<double>();
    }

    std::optional<double> opt_num(const char* key) {
        const auto* v = get(key, false);
        if (!v || v->is_null()) return std::nullopt;
        if (!v->is_number()) fail(at(key), "expected number");
        return v->get<double>();
    }

    bool boolean(const char* key, bool fallback) {
        const auto* v = get(key, false);
        if (!v) return fallback;
        if (!v->is_boolean()) fail(at(key), "expected boolean");
        return v->get<bool>();
    }

    std::vector<std::string> strings(const char* key, bool required = false) {
        const auto* v = get(key, required);
        std::vector<std::string> out;
        if (!v) return out;
        if (!v->is_array()) fail(at(key), "expected array");
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_string()) fail(at(key) + "[" + std::to_string(i) + "]", "expected string");
            out.push_back((*v)[i].get<std::string>());
        }
        return out;
    }

    const ordered_json& array(const char* key) {
        static const ordered_json empty = ordered_json::array();
        const auto* v = get(key, false);
        if (!v) return empty;
        if (!v->is_array()) fail(at(key), "expected array");
        return *v;
    }

    std::string at(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.contains(it.key())) fail(at(it.key()), "unknown field");
        }
    }

private:
    const ordered_json& j_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

Decision read_decision(Reader& r) {
    const auto s = r.str("decision");
    auto d = parse_decision(s);
    if (!d) Reader::fail(r.at("decision"), "unknown decision '" + s + "'");
    return *d;
}

ParamMap read_params(Reader& r) {
    ParamMap out;
    const auto* v = r.get("target_params", true);
    if (!v->is_object()) Reader::fail(r.at("target_params"), "expected object");
    for (auto it = v->begin(); it != v->end(); ++it) {
        if (!it->is_string()) Reader::fail(r.at("target_params") + "." + it.key(), "expected string");
        out.emplace_back(it.key(), it->get<std::string>());
    }
    return out;
}

CompensationRecord compensation_from_json(const ordered_json& j, const std::string& path) {
    Reader r(j, path);
    CompensationRecord c;
    c.reason = r.str("reason");
    c.residual_risk = r.num("residual_risk");
    c.compensating_control = r.str("compensating_control");
    c.justification = r.str("justification");
    c.coverage = r.num("coverage");
    c.acceptable = r.boolean("acceptable", false);
    r.finish();
    return c;
}

AlternativeProposal alternative_from_json(const ordered_json& j, const std::string& path) {
    Reader r(j, path);
    AlternativeProposal a;
    a.source = r.str("source");
    a.decision = read_decision(r);
    a.target_params = read_params(r);
    a.enhancements = r.strings("enhancements");
    if (const auto* c = r.get("compensation", false)) a.compensation = compensation_from_json(*c, r.at("compensation"));
    a.rationale = r.str("rationale");
    a.citations = r.strings("citations");
    a.confidence = r.opt_num("confidence");
    r.finish();
    return a;
}

RiskGap gap_from_json(const ordered_json& j, const std::string& path) {
    Reader r(j, path);
    RiskGap g;
    g.value = r.num("value");
    const auto& arr = r.array("uncovered_tags");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader e(arr[i], r.at("uncovered_tags") + "[" + std::to_string(i) + "]");
        const auto name = e.str("tag");
        auto tag = parse_context_tag(name);
        if (!tag) Reader::fail(e.at("tag"), "unknown context tag '" + name + "'");
        g.uncovered_tags.push_back({*tag, e.num("coverage")});
        e.finish();
    }
    r.finish();
    return g;
}

} // namespace

ordered_json params_to_json(const ParamMap& params) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : params) j[k] = v;
    return j;
}

ordered_json to_json(const CompensationRecord& c) {
    ordered_json j;
    j["reason"] = c.reason;
    j["residual_risk"] = c.residual_risk;
    j["compensating_control"] = c.compensating_control;
    j["justification"] = c.justification;
    j["coverage"] = c.coverage;
    j["acceptable"] = c.acceptable;
    return j;
}

ordered_json to_json(const TargetControlRecord& rec) {
    ordered_json j;
    j["control_id"] = rec.control_id;
    j["decision"] = to_string(rec.decision);
    j["target_params"] = params_to_json(rec.target_params);
    j["enhancements"] = rec.enhancements;
    if (rec.compensation) j["compensation"] = to_json(*rec.compensation);
    j["rationale"] = rec.rationale;
    j["rationale_source"] = rec.rationale_source;
    j["owner"] = rec.owner;
    j["artifacts"] = rec.artifacts;
    j["citations"] = rec.citations;
    if (rec.insufficiency) j["insufficiency"] = *rec.insufficiency;
    if (!rec.advisor_status.empty()) j["advisor_status"] = rec.advisor_status;
    j["conflict"] = rec.conflict;
    if (rec.alternative) j["alternative"] = to_json(*rec.alternative);
    if (!rec.needs_clarification.empty()) j["needs_clarification"] = rec.needs_clarification;
    if (rec.confidence) j["confidence"] = *rec.confidence;
    if (!rec.notes.empty()) j["notes"] = rec.notes;
    return j;
}

ordered_json to_json(const TargetProfile& p) {
    ordered_json j;
    j["system_name"] = p.system_name;
    j["category"] = to_string(p.category);
    j["status"] = to_string(p.status);
    j["requirements"] = profiling::to_json(p.requirements);
    j["records"] = ordered_json::array();
    for (const auto& r : p.records) j["records"].push_back(to_json(r));
    j["added_enhancements"] = p.added_enhancements;
    j["added_controls"] = p.added_controls;
    j["baseline_gap"] = tags_json(p.baseline_gap);
    j["residual_gap"] = tags_json(p.residual_gap);
    j["open_items"] = ordered_json::array();
    for (const auto& o : p.open_items) {
        j["open_items"].push_back({{"kind", o.kind}, {"subject", o.subject}, {"detail", o.detail}});
    }
    const auto& pv = p.provenance;
    j["provenance"] = {
        {"catalog_version", pv.catalog_version},
        {"passport_digest", pv.passport_digest},
        {"thresholds",
         {{"relevance", pv.thresholds.relevance},
          {"risk", pv.thresholds.risk},
          {"equivalence", pv.thresholds.equivalence},
          {"gap_coverage", pv.thresholds.gap_coverage}}},
        {"engine", pv.engine},
        {"advisor", pv.advisor},
        {"timestamp", pv.timestamp},
    };
    if (!pv.session_digest.empty()) j["provenance"]["session_digest"] = pv.session_digest;
    if (p.approval) {
        j["approval"] = {{"reviewer", p.approval->reviewer},
                         {"timestamp", p.approval->timestamp},
                         {"session_id", p.approval->session_id},
                         {"round", p.approval->round},
                         {"session_digest", p.approval->session_digest}};
    }
    return j;
}

std::string serialize_profile(const TargetProfile& profile) { return to_json(profile).dump(2) + "\n"; }

std::string record_digest(const TargetControlRecord& record) { return sha256_hex(to_json(record).dump()); }

TargetControlRecord record_from_json(const ordered_json& j) {
    Reader r(j, "$");
    TargetControlRecord rec;
    rec.control_id = r.str("control_id");
    rec.decision = read_decision(r);
    rec.target_params = read_params(r);
    rec.enhancements = r.strings("enhancements");
    if (const auto* c = r.get("compensation", false)) rec.compensation = compensation_from_json(*c, r.at("compensation"));
    rec.rationale = r.str("rationale");
    rec.rationale_source = r.str("rationale_source");
    rec.owner = r.str("owner");
    rec.artifacts = r.strings("artifacts");
    rec.citations = r.strings("citations");
    if (r.get("insufficiency", false)) rec.insufficiency = r.strings("insufficiency");
    rec.advisor_status = r.str("advisor_status", false);
    rec.conflict = r.boolean("conflict", false);
    if (const auto* a = r.get("alternative", false)) rec.alternative = alternative_from_json(*a, r.at("alternative"));
    rec.needs_clarification = r.strings("needs_clarification");
    rec.confidence = r.opt_num("confidence");
    rec.notes = r.strings("notes");
    r.finish();
    return rec;
}

TargetProfile profile_from_json(const ordered_json& j) {
    Reader r(j, "$");
    TargetProfile p;
    p.system_name = r.str("system_name");
    const auto cat = r.str("category");
    auto c = parse_category(cat);
    if (!c) Reader::fail(r.at("category"), "unknown category '" + cat + "'");
    p.category = *c;
    const auto status = r.str("status");
    bool known = false;
    for (auto s : {ProfileStatus::Draft, ProfileStatus::UnderReview, ProfileStatus::Approved}) {
        if (to_string(s) == status) {
            p.status = s;
            known = true;
        }
    }
    if (!known) Reader::fail(r.at("status"), "unknown status '" + status + "'");

    const auto& reqs = r.array("requirements");
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        Reader e(reqs[i], r.at("requirements") + "[" + std::to_string(i) + "]");
        profiling::Requirement q;
        const auto obj = e.str("objective");
        auto o = parse_objective(obj);
        if (!o) Reader::fail(e.at("objective"), "unknown objective '" + obj + "'");
        q.objective = *o;
        q.statement = e.str("statement");
        q.source_fields = e.strings("source_fields");
        e.finish();
        p.requirements.add(std::move(q));
    }

    const auto& recs = r.array("records");
    for (std::size_t i = 0; i < recs.size(); ++i) {
        try {
            p.records.push_back(record_from_json(recs[i]));
        } catch (const Error& e) {
            const std::string prefix = r.at("records") + "[" + std::to_string(i) + "]";
            std::string msg = e.what();
            if (msg.starts_with("$")) msg = prefix + msg.substr(1);
            throw Error(ErrorCode::SchemaError, msg, {{"path", prefix}});
        }
    }
    p.added_enhancements = r.strings("added_enhancements");
    p.added_controls = r.strings("added_controls");
    p.baseline_gap = gap_from_json(*r.get("baseline_gap", true), r.at("baseline_gap"));
    p.residual_gap = gap_from_json(*r.get("residual_gap", true), r.at("residual_gap"));

    const auto& items = r.array("open_items");
    for (std::size_t i = 0; i < items.size(); ++i) {
        Reader e(items[i], r.at("open_items") + "[" + std::to_string(i) + "]");
        p.open_items.push_back({e.str("kind"), e.str("subject"), e.str("detail")});
        e.finish();
    }

    Reader pv(*r.get("provenance", true), r.at("provenance"));
    p.provenance.catalog_version = pv.str("catalog_version");
    p.provenance.passport_digest = pv.str("passport_digest");
    {
        Reader t(*pv.get("thresholds", true), pv.at("thresholds"));
        p.provenance.thresholds.relevance = t.num("relevance");
        p.provenance.thresholds.risk = t.num("risk");
        p.provenance.thresholds.equivalence = t.num("equivalence");
        p.provenance.thresholds.gap_coverage = t.num("gap_coverage");
        t.finish();
    }
    p.provenance.engine = pv.str("engine");
    p.provenance.advisor = pv.str("advisor");
    p.provenance.timestamp = pv.str("timestamp");
    p.provenance.session_digest = pv.str("session_digest", false);
    pv.finish();

    if (const auto* a = r.get("approval", false)) {
        Reader ar(*a, r.at("approval"));
        Approval ap;
        ap.reviewer = ar.str("reviewer");
        ap.timestamp = ar.str("timestamp");
        ap.session_id = ar.str("session_id");
        ap.round = static_cast<int>(ar.num("round"));
        ap.session_digest = ar.str("session_digest");
        ar.finish();
        p.approval = std::move(ap);
    }
    r.finish();
    return p;
}

TargetProfile parse_profile(std::string_view raw) {
    if (!utf8::is_valid(raw)) throw Error(ErrorCode::InvalidEncoding, "profile is not valid UTF-8");
    ordered_json j;
    try {
        j = ordered_json::parse(raw.begin(), raw.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("profile JSON: ") + e.what());
    }
    return profile_from_json(j);
}

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// Table cells cannot contain raw pipes or newlines.
std::string cell(std::string s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += "<br>";
        else out += c;
    }
    return out.empty() ? "-" : out;
}

std::string params_text(const ParamMap& params) {
    std::string out;
    for (const auto& [k, v] : params) {
        if (!out.empty()) out += "; ";
        out += k + ": " + v;
    }
    return out;
}

std::string list_text(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

} // namespace

std::string render_markdown(const TargetProfile& p, const catalog::Catalog& catalog) {
    std::string md;
    md += "# Target security profile: " + p.system_name + "\n\n";
    md += "- Category: " + std::string(to_string(p.category)) + "\n";
    md += "- Status: " + std::string(to_string(p.status)) + "\n";
    md += "- Catalog version: " + p.provenance.catalog_version + "\n";
    md += "- Passport digest: `" + p.provenance.passport_digest + "`\n";
    md += "- Thresholds: theta_r " + fmt2(p.provenance.thresholds.relevance) + ", theta_risk " +
          fmt2(p.provenance.thresholds.risk) + ", equivalence " + fmt2(p.provenance.thresholds.equivalence) + "\n";
    md += "- Generated: " + p.provenance.timestamp + " by " + p.provenance.engine + " (advisor: " +
          p.provenance.advisor + ")\n";
    if (p.approval) {
        md += "- Approved by " + p.approval->reviewer + " at " + p.approval->timestamp + " (session " +
              p.approval->session_id + ", round " + std::to_string(p.approval->round) + ")\n";
    }

    md += "\n## Controls against baseline\n\n";
    md += "| Control | Decision | Baseline parameters | Target parameters | Enhancements | Owner | Artifacts |\n";
    md += "|---|---|---|---|---|---|---|\n";
    for (const auto& r : p.records) {
        std::string baseline = "(not in baseline)";
        if (r.decision != Decision::Add) {
            if (const auto* c = catalog.find(r.control_id)) {
                ParamMap base;
                for (const auto& prm : c->min_params) base.emplace_back(prm.key, prm.baseline_value);
                baseline = params_text(base);
            }
        }
        std::string decision(to_string(r.decision));
        if (r.conflict) decision += " (conflict)";
        md += "| " + r.control_id + " | " + decision + " | " + cell(baseline) + " | " + cell(params_text(r.target_params)) +
              " | " + cell(list_text(r.enhancements)) + " | " + cell(r.owner) + " | " + cell(list_text(r.artifacts)) +
              " |\n";
    }

    md += "\n## Rationale\n\n";
    for (const auto& r : p.records) {
        md += "- **" + r.control_id + "** (" + r.rationale_source + "): " + r.rationale;
        if (!r.citations.empty()) md += " Citations: " + list_text(r.citations) + ".";
        if (r.insufficiency) md += " Missing passport information: " + list_text(*r.insufficiency) + ".";
        md += "\n";
        if (r.alternative) {
            md += "  - Alternative from " + r.alternative->source + ": " + std::string(to_string(r.alternative->decision)) +
                  ". " + r.alternative->rationale + "\n";
        }
        for (const auto& n : r.notes) md += "  - Note: " + n + "\n";
    }

    bool any_comp = false;
    for (const auto& r : p.records) {
        if (!r.compensation) continue;
        if (!any_comp) {
            md += "\n## Compensating measures\n\n";
            md += "| Control | Reason | Compensating measure | Coverage | Residual risk | Acceptable |\n";
            md += "|---|---|---|---|---|---|\n";
            any_comp = true;
        }
        const auto& c = *r.compensation;
        md += "| " + r.control_id + " | " + cell(c.reason) + " | " + cell(c.compensating_control) + " | " +
              fmt2(c.coverage) + " | " + fmt2(c.residual_risk) + " | " + (c.acceptable ? "yes" : "no") + " |\n";
    }

    md += "\n## Risk gap\n\n";
    auto gap_line = [&](const char* label, const RiskGap& g) {
        md += "- " + std::string(label) + ": " + fmt2(g.value);
        if (!g.uncovered_tags.empty()) {
            md += " (";
            for (std::size_t i = 0; i < g.uncovered_tags.size(); ++i) {
                if (i) md += ", ";
                md += std::string(to_string(g.uncovered_tags[i].tag)) + " " + fmt2(g.uncovered_tags[i].coverage);
            }
            md += ")";
        }
        md += "\n";
    };
    gap_line("Baseline", p.baseline_gap);
    gap_line("After enhancements", p.residual_gap);
    if (!p.added_controls.empty()) md += "- Added controls: " + list_text(p.added_controls) + "\n";

    if (!p.open_items.empty()) {
        md += "\n## Open items\n\n";
        for (const auto& o : p.open_items) {
            md += "- " + o.kind + (o.subject.empty() ? "" : " (" + o.subject + ")") + ": " + o.detail + "\n";
        }
    }
    return md;
}

} // namespace tsp::decision
