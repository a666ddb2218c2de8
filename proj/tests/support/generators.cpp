#include "generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "tsp/utf8.hpp"

namespace tsp::gen {

using nlohmann::ordered_json;

namespace {

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T, std::size_t N>
const T& one_of(Rng& rng, const std::array<T, N>& items) {
    return items[pick(rng, N)];
}

constexpr std::array<const char*, 16> kWords{"access", "record",  "operator", "system",  "review", "account",
                                             "policy", "network", "control",  "tablet",  "log",    "incident",
                                             "vendor", "session", "backup",   "station"};
constexpr std::array<const char*, 6> kCapitalWords{"Operators", "The", "Each", "Vendors", "Logs", "Every"};
constexpr std::array<const char*, 4> kCyrillicWords{"Оператор", "Журнал", "Система", "Доступ"};
constexpr std::array<const char*, 4> kNames{"Smith", "Alpha", "Ivanova", "Kent"};
constexpr std::array<const char*, 5> kListedAbbrev{"Dr.", "Mr.", "e.g.", "cf.", "Fig."};
constexpr std::array<const char*, 3> kTerminators{".", "?", "!"};

std::u32string u32(const std::string& s) { return utf8::decode(s); }

std::u32string sentence(Rng& rng) {
    std::string s = chance(rng, 0.2) ? one_of(rng, kCyrillicWords) : one_of(rng, kCapitalWords);
    const std::size_t words = 3 + pick(rng, 10);
    for (std::size_t i = 0; i < words; ++i) {
        s += ' ';
        switch (pick(rng, 8)) {
        case 0: s += std::string(one_of(rng, kListedAbbrev)) + " " + one_of(rng, kNames); break;
        case 1: s += "approx. " + std::string(one_of(rng, kWords)); break;
        case 2: s += std::to_string(pick(rng, 100)) + "." + std::to_string(pick(rng, 10)); break;
        default: s += one_of(rng, kWords);
        }
    }
    s += one_of(rng, kTerminators);
    return u32(s);
}

std::u32string heading(Rng& rng) {
    std::string h(1 + pick(rng, 3), '#');
    h += " Section " + std::to_string(pick(rng, 50)) + " " + one_of(rng, kWords);
    return u32(h);
}

} // namespace

SentenceDoc sentence_doc(Rng& rng, std::size_t sentences) {
    std::u32string text;
    std::vector<std::size_t> starts;
    auto put = [&](const std::u32string& unit) {
        starts.push_back(text.size());
        text += unit;
    };
    if (chance(rng, 0.5)) {
        put(heading(rng));
        text += chance(rng, 0.5) ? U"\n\n" : U"\n";
    }
    for (std::size_t i = 0; i < sentences; ++i) {
        put(sentence(rng));
        if (i + 1 == sentences) break;
        const auto sep = pick(rng, 10);
        if (sep < 6) {
            text += U" ";
        } else if (sep < 7) {
            text += U"\n";
        } else if (sep < 9) {
            text += U"\n\n";
        } else {
            text += U"\n\n";
            put(heading(rng));
            text += chance(rng, 0.5) ? U"\n\n" : U"\n";
        }
    }
    if (chance(rng, 0.3)) text += U"\n";
    return {utf8::encode(text), text.size(), std::move(starts)};
}

namespace {

struct Unit {
    const char* singular;
    const char* plural;
    std::int64_t seconds;
};

constexpr std::array<Unit, 5> kUnits{{
    {"minute", "minutes", 60},
    {"hour", "hours", 3600},
    {"day", "days", 86400},
    {"week", "weeks", 7 * 86400},
    {"month", "months", 30 * 86400},
}};

struct Phrase {
    const char* text;
    std::int64_t seconds;
};

constexpr std::array<Phrase, 6> kPhrases{{
    {"End of user working day", 86400},
    {"At least annually", 365 * 86400},
    {"Quarterly", 90 * 86400},
    {"Monthly", 30 * 86400},
    {"Weekly", 7 * 86400},
    {"Daily", 86400},
}};

IntervalValue amount(Rng& rng, std::int64_t n, const Unit& u) {
    const std::string qty = std::to_string(n) + " " + (n == 1 ? u.singular : u.plural);
    static constexpr std::array<const char*, 4> kForms{"", "Within ", "Every ", "Report within "};
    std::string text = std::string(one_of(rng, kForms)) + qty;
    if (chance(rng, 0.3)) text += " of detection";
    if (text.front() >= 'a' && text.front() <= 'z') text.front() = static_cast<char>(text.front() - 'a' + 'A');
    return {text, n * u.seconds};
}

} // namespace

IntervalValue random_interval(Rng& rng) {
    if (chance(rng, 0.2)) {
        const auto& p = one_of(rng, kPhrases);
        return {p.text, p.seconds};
    }
    return amount(rng, 1 + static_cast<std::int64_t>(pick(rng, 48)), one_of(rng, kUnits));
}

IntervalValue interval_at_most(Rng& rng, std::int64_t bound) {
    for (int tries = 0; tries < 64; ++tries) {
        auto v = random_interval(rng);
        if (v.seconds <= bound) return v;
    }
    // Minutes always fit: every generated bound is at least one minute.
    const auto n = std::max<std::int64_t>(1, std::min<std::int64_t>(bound / 60, 1 + pick(rng, 59)));
    return amount(rng, n, kUnits[0]);
}

IntervalValue interval_longer_than(Rng& rng, std::int64_t bound) {
    for (int tries = 0; tries < 64; ++tries) {
        auto v = random_interval(rng);
        if (v.seconds > bound) return v;
    }
    const auto& u = kUnits[4];
    return amount(rng, bound / u.seconds + 1 + static_cast<std::int64_t>(pick(rng, 3)), u);
}

namespace {

constexpr std::array<const char*, 10> kTags{"privileged-access",     "remote-access", "public-facing",
                                            "external-interconnect", "cloud-deployment", "mobile",
                                            "high-availability-mission", "sensitive-data", "multi-tenant",
                                            "unattended-operation"};
constexpr std::array<const char*, 8> kFamilies{"AC", "IR", "SC", "CP", "IA", "CA", "AU", "CM"};
constexpr std::array<const char*, 5> kKinds{"duration", "frequency", "threshold", "directive", "scope"};
constexpr std::array<const char*, 3> kProcedures{"account_termination", "incident_reporting", "media_disposal"};

std::vector<const char*> some_tags(Rng& rng, std::size_t max) {
    std::vector<const char*> all(kTags.begin(), kTags.end());
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(pick(rng, max + 1));
    return all;
}

double weight(Rng& rng) { return static_cast<double>(1 + pick(rng, 10)) / 10.0; }

} // namespace

GeneratedCatalog random_catalog(Rng& rng, const CatalogOptions& options) {
    GeneratedCatalog out;
    auto remember = [&](const IntervalValue& v) {
        out.seconds[v.text] = v.seconds;
        return v.text;
    };

    std::set<std::string> used;
    std::vector<std::string> ids;
    const std::size_t base_count = 3 + pick(rng, 10);
    for (std::size_t i = 0; i < base_count; ++i) {
        std::string id;
        do {
            id = std::string(one_of(rng, kFamilies)) + "-" + std::to_string(1 + pick(rng, 30));
        } while (!used.insert(id).second);
        ids.push_back(id);
        const std::size_t enh = pick(rng, 3);
        for (std::size_t e = 1; e <= enh; ++e) {
            const auto eid = id + "(" + std::to_string(e) + ")";
            used.insert(eid);
            ids.push_back(eid);
        }
    }

    ordered_json controls = ordered_json::array();
    for (const auto& id : ids) {
        ordered_json c;
        c["id"] = id;
        c["name"] = "Control " + id;
        c["min_params"] = ordered_json::array();
        const std::size_t params = pick(rng, 3);
        for (std::size_t p = 0; p < params; ++p) {
            ordered_json pj;
            pj["key"] = "param_" + std::to_string(p);
            const std::string kind = one_of(rng, kKinds);
            pj["value_kind"] = kind;
            const bool interval = kind == "duration" || kind == "frequency";
            IntervalValue base;
            if (interval) {
                base = random_interval(rng);
                pj["baseline_value"] = remember(base);
            } else {
                pj["baseline_value"] = "Baseline " + kind + " " + std::to_string(pick(rng, 100));
            }
            pj["refinement_rules"] = ordered_json::array();
            for (const char* tag : some_tags(rng, 2)) {
                ordered_json rj;
                rj["when_tag"] = tag;
                if (interval) {
                    rj["value"] = remember(chance(rng, options.relaxing_rule_rate)
                                               ? interval_longer_than(rng, base.seconds)
                                               : interval_at_most(rng, base.seconds));
                } else {
                    rj["value"] = std::string("Tightened ") + tag;
                }
                if (chance(rng, 0.3)) rj["requires_fields"] = {std::string("procedures.") + one_of(rng, kProcedures)};
                pj["refinement_rules"].push_back(rj);
            }
            c["min_params"].push_back(pj);
        }
        c["enhancements"] = ordered_json::array();
        if (id.find('(') == std::string::npos) {
            for (const auto& other : ids) {
                if (other.rfind(id + "(", 0) == 0) c["enhancements"].push_back(other);
            }
        }
        if (chance(rng, 0.3)) c["related"] = {ids[pick(rng, ids.size())]};
        c["applicability_tags"] = ordered_json::array();
        for (const char* t : some_tags(rng, 2)) c["applicability_tags"].push_back(t);
        c["mitigation_tags"] = ordered_json::array();
        for (const char* t : some_tags(rng, 3)) c["mitigation_tags"].push_back({{"tag", t}, {"weight", weight(rng)}});
        controls.push_back(c);
    }

    // Nested baselines: each level adds a random subset of the remaining ids.
    std::vector<int> level(ids.size());
    for (auto& l : level) l = static_cast<int>(pick(rng, 4)); // 3 = in no baseline
    level[pick(rng, ids.size())] = 0;
    ordered_json baselines;
    const char* names[] = {"Low", "Moderate", "High"};
    for (int b = 0; b < 3; ++b) {
        ordered_json list = ordered_json::array();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (level[i] <= b) list.push_back(ids[i]);
        }
        baselines[names[b]] = list;
    }

    out.doc["version"] = "random-" + std::to_string(rng() % 100000);
    out.doc["source_doc_id"] = "generated";
    out.doc["controls"] = controls;
    out.doc["baselines"] = baselines;
    out.control_ids = ids;
    return out;
}

ordered_json random_passport(Rng& rng, const std::vector<std::string>& control_ids) {
    static constexpr std::array<const char*, 3> kLevels{"Low", "Moderate", "High"};
    ordered_json p;
    p["system_name"] = "Generated system " + std::to_string(rng() % 1000);
    p["components"] = {{{"name", "Server"}, {"kind", "server"}}};
    p["data_categories"] = ordered_json::array();
    const std::size_t cats = 1 + pick(rng, 3);
    for (std::size_t i = 0; i < cats; ++i) {
        p["data_categories"].push_back({{"name", "Data " + std::to_string(i)},
                                        {"sensitivity",
                                         {{"confidentiality", one_of(rng, kLevels)},
                                          {"integrity", one_of(rng, kLevels)},
                                          {"availability", one_of(rng, kLevels)}}}});
    }
    p["user_roles"] = {"Operator", "Network Engineer"};
    p["admin_roles"] = {"Security Administrator"};
    if (chance(rng, 0.5)) p["admin_roles"].push_back("Incident Response Lead");
    if (chance(rng, 0.5)) p["integrations"] = {{{"name", "Partner link"}, {"direction", "outbound"}}};
    if (chance(rng, 0.5)) {
        static constexpr std::array<const char*, 3> kAudience{"public", "partner", "internal"};
        p["external_services"] = {{{"name", "Portal"}, {"audience", one_of(rng, kAudience)}}};
    }
    if (chance(rng, 0.8)) {
        ordered_json d;
        d["cloud"] = chance(rng, 0.5);
        d["mobile_devices"] = chance(rng, 0.5);
        d["remote_access"] = chance(rng, 0.5);
        d["public_facing"] = chance(rng, 0.3);
        d["flags"] = ordered_json::array();
        if (chance(rng, 0.3)) d["flags"].push_back("multi-tenant");
        if (chance(rng, 0.3)) d["flags"].push_back("unattended-operation");
        p["deployment"] = d;
    }
    if (chance(rng, 0.5)) p["missions"] = {{{"description", "Keep running"}, {"critical", chance(rng, 0.7)}}};
    p["procedures"] = ordered_json::object();
    for (const char* proc : kProcedures) {
        if (chance(rng, 0.6)) p["procedures"][proc] = std::string("Documented ") + proc;
    }
    if (!control_ids.empty() && chance(rng, 0.3)) {
        ordered_json decl{{"control_id", control_ids[pick(rng, control_ids.size())]}, {"reason", "Not supported"}};
        if (chance(rng, 0.5)) {
            decl["compensating_measure"] = {{"description", "Manual check"},
                                            {"mitigation_tags", {{{"tag", one_of(rng, kTags)}, {"weight", weight(rng)}}}}};
        }
        p["infeasible_controls"] = {decl};
    }
    return p;
}

ordered_json raise_one_level(Rng& rng, const ordered_json& passport) {
    ordered_json out = passport;
    std::vector<std::pair<std::size_t, std::string>> raisable;
    const auto& cats = out["data_categories"];
    for (std::size_t i = 0; i < cats.size(); ++i) {
        for (const char* k : {"confidentiality", "integrity", "availability"}) {
            if (cats[i]["sensitivity"][k] != "High") raisable.emplace_back(i, k);
        }
    }
    if (raisable.empty()) return out;
    const auto& [i, k] = raisable[pick(rng, raisable.size())];
    auto& level = out["data_categories"][i]["sensitivity"][k];
    level = level == "Low" ? "Moderate" : "High";
    return out;
}

rag::Vector random_unit(Rng& rng, std::size_t dim) {
    std::normal_distribution<double> normal;
    rag::Vector v(dim);
    for (;;) {
        for (auto& x : v) x = normal(rng);
        double n = 0.0;
        for (double x : v) n += x * x;
        if (n > 1e-12) {
            for (auto& x : v) x /= std::sqrt(n);
            return v;
        }
    }
}

namespace {

constexpr std::array<const char*, 4> kSections{"Access control", "Incident handling", "Remote work", "Scope"};
constexpr std::array<const char*, 5> kControlIds{"AC-2", "AC-17", "IR-6", "SC-7", "AC-2(5)"};
constexpr std::array<const char*, 4> kDocIds{"guide-01", "guide-02", "guide-03", "guide-04"};
constexpr std::array<const char*, 4> kDates{"2021-03-01", "2022-07-15", "2023-01-31", "2024-11-30"};

} // namespace

SearchCorpus random_search_corpus(Rng& rng, std::size_t n, std::size_t dim) {
    SearchCorpus out;
    for (std::size_t i = 0; i < n; ++i) {
        rag::Chunk c;
        c.doc_id = one_of(rng, kDocIds);
        c.span = {i * 10, i * 10 + 10};
        c.text = "chunk " + std::to_string(i);
        c.metadata.section_path = {one_of(rng, kSections)};
        if (chance(rng, 0.5)) c.metadata.section_path.push_back(one_of(rng, kSections));
        std::set<std::string> ids;
        for (std::size_t k = pick(rng, 3); k > 0; --k) ids.insert(one_of(rng, kControlIds));
        c.metadata.control_ids.assign(ids.begin(), ids.end());
        std::set<std::string> fams;
        for (const auto& id : ids) fams.insert(id.substr(0, 2));
        c.metadata.families.assign(fams.begin(), fams.end());
        if (chance(rng, 0.9)) c.metadata.doc_date = one_of(rng, kDates);
        c.chunk_id = rag::make_chunk_id(c.doc_id, c.span, c.text);
        out.vectors.push_back(!out.vectors.empty() && chance(rng, 0.1) ? out.vectors[pick(rng, out.vectors.size())]
                                                                        : random_unit(rng, dim));
        out.chunks.push_back(std::move(c));
    }
    return out;
}

rag::SearchFilters random_filters(Rng& rng) {
    rag::SearchFilters f;
    for (std::size_t k = pick(rng, 4); k > 0; --k) {
        switch (pick(rng, 6)) {
        case 0: f.section = one_of(rng, kSections); break;
        case 1: f.control_id = one_of(rng, kControlIds); break;
        case 2: f.doc_id = one_of(rng, kDocIds); break;
        case 3: f.family = chance(rng, 0.5) ? "AC" : "IR"; break;
        case 4: f.date_from = one_of(rng, kDates); break;
        default: f.date_to = one_of(rng, kDates); break;
        }
    }
    return f;
}

} // namespace tsp::gen
