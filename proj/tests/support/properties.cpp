#include "properties.hpp"

#include <algorithm>
#include <set>

#include "generators.hpp"
#include "support.hpp"
#include "tsp/catalog.hpp"
#include "tsp/error.hpp"
#include "tsp/gateway/pipeline.hpp"
#include "tsp/interval.hpp"
#include "tsp/profiling.hpp"
#include "tsp/review/session.hpp"

namespace tsp::prop {

namespace {

std::vector<std::string> ids_of(const catalog::BaselineProfile& b) {
    std::vector<std::string> out;
    for (const auto& c : b) out.push_back(c.id);
    return out;
}

bool subset(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::set<std::string> sb(b.begin(), b.end());
    return std::all_of(a.begin(), a.end(), [&](const auto& x) { return sb.contains(x); });
}

gateway::DeriveOptions options() {
    gateway::DeriveOptions o;
    o.timestamp = test::kFixedTimestamp;
    return o;
}

} // namespace

std::string catalog_defect(std::mt19937_64& rng, CatalogStats& stats) {
    const auto gen = gen::random_catalog(rng);
    catalog::Catalog cat;
    try {
        cat = catalog::parse_catalog(gen.doc.dump());
    } catch (const Error& e) {
        return std::string("valid catalog rejected: ") + e.what();
    }
    ++stats.catalogs;
    const auto low = ids_of(cat.baseline_for(Category::Low));
    const auto mod = ids_of(cat.baseline_for(Category::Moderate));
    const auto high = ids_of(cat.baseline_for(Category::High));
    if (!subset(low, mod) || !subset(mod, high)) return "baselines do not nest";

    // Breaking the nesting must be refused at parse time.
    std::vector<std::string> high_only;
    for (const auto& id : high) {
        if (std::find(mod.begin(), mod.end(), id) == mod.end()) high_only.push_back(id);
    }
    if (!high_only.empty()) {
        auto broken = gen.doc;
        broken["baselines"]["Low"].push_back(high_only.front());
        try {
            catalog::parse_catalog(broken.dump());
            return "non-nested baselines accepted (" + high_only.front() + " in Low only)";
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BaselineNotMonotone) {
                return "non-nested baselines raised " + std::string(to_string(e.code()));
            }
        }
    }

    const auto pj = gen::random_passport(rng, gen.control_ids);
    const auto model = passport::parse_passport(pj.dump());
    gateway::DeriveResult r;
    try {
        r = gateway::derive(model, cat, options());
    } catch (const Error& e) {
        return std::string("derive failed: ") + e.what();
    }
    const auto category = profiling::categorize(model);
    if (r.category != category) return "derive category differs from categorize";
    const auto baseline = ids_of(cat.baseline_for(category));
    const auto& recs = r.profile.records;
    if (recs.size() < baseline.size()) return "fewer records than baseline controls";
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        if (recs[i].control_id != baseline[i]) {
            return "record " + std::to_string(i) + " is " + recs[i].control_id + ", baseline has " + baseline[i];
        }
        if (recs[i].decision == decision::Decision::Add) return baseline[i] + " is in the baseline but marked Add";
    }
    for (std::size_t i = baseline.size(); i < recs.size(); ++i) {
        if (recs[i].decision != decision::Decision::Add) return recs[i].control_id + " extra record is not Add";
        if (std::find(baseline.begin(), baseline.end(), recs[i].control_id) != baseline.end()) {
            return recs[i].control_id + " added although in the baseline";
        }
        if (i > baseline.size() && !(recs[i - 1].control_id < recs[i].control_id)) return "Add records out of id order";
        ++stats.adds;
    }
    stats.records += recs.size();

    const auto raised = passport::parse_passport(gen::raise_one_level(rng, pj).dump());
    const auto raised_category = profiling::categorize(raised);
    if (raised_category < category) {
        return "raising an impact level lowered the category from " + std::string(to_string(category)) + " to " +
               std::string(to_string(raised_category));
    }
    if (raised_category != category) ++stats.raised_category;
    if (!subset(baseline, ids_of(cat.baseline_for(raised_category)))) return "raised baseline dropped controls";
    return {};
}

std::string never_relax_defect(std::mt19937_64& rng, RelaxStats& stats) {
    gen::CatalogOptions opts;
    opts.relaxing_rule_rate = 0.5;
    const auto gen = gen::random_catalog(rng, opts);
    const auto cat = catalog::parse_catalog(gen.doc.dump());
    const auto model = passport::parse_passport(gen::random_passport(rng, gen.control_ids).dump());
    const auto seconds = [&](const std::string& text) -> std::optional<std::int64_t> {
        auto it = gen.seconds.find(text);
        if (it == gen.seconds.end()) return std::nullopt;
        return it->second;
    };

    ++stats.derives;
    decision::TargetProfile profile;
    try {
        profile = gateway::derive(model, cat, options()).profile;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::RelaxationRejected) return std::string("derive failed: ") + e.what();
        ++stats.derive_rejections;
        const auto& d = e.details();
        const auto base = seconds(d.value("baseline", ""));
        const auto value = seconds(d.value("value", ""));
        if (!base || !value) return "RelaxationRejected names unknown values: " + d.dump();
        if (*value <= *base) return "RelaxationRejected for a value that does not loosen: " + d.dump();
        return {};
    }

    struct Target {
        std::string control_id;
        std::string key;
        std::int64_t baseline = 0;
    };
    std::vector<Target> targets;
    for (const auto& rec : profile.records) {
        const auto& control = cat.get_control(rec.control_id);
        for (const auto& p : control.min_params) {
            if (!has_interval_form(p.value_kind)) continue;
            const auto* value = decision::find_param(rec.target_params, p.key);
            if (!value) continue;
            ++stats.interval_values;
            const auto base = seconds(p.baseline_value);
            const auto v = seconds(*value);
            if (!base || !v) return rec.control_id + "." + p.key + " carries an unknown value '" + *value + "'";
            if (*v > *base) {
                return rec.control_id + "." + p.key + " loosened from '" + p.baseline_value + "' to '" + *value + "'";
            }
            targets.push_back({rec.control_id, p.key, *base});
        }
    }
    if (targets.empty()) return {};

    // Expert edit of one interval parameter.
    const auto& t = targets[std::uniform_int_distribution<std::size_t>(0, targets.size() - 1)(rng)];
    const auto iv = gen::random_interval(rng);
    const bool loosens = iv.seconds > t.baseline;
    ++stats.edits;
    if (loosens) ++stats.loosening_edits;
    auto session = review::open_session(profile, "expert", "s-1", test::kFixedTimestamp);
    const auto before = session;
    const nlohmann::json payload = {{"target_params", {{t.key, iv.text}}}, {"rationale", "Expert value " + iv.text}};
    try {
        review::record_action(session, cat, t.control_id, review::Action::Edit, payload, "expert",
                              test::kFixedTimestamp);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::RelaxationRejected && loosens) {
            ++stats.edit_rejections;
            if (!(session == before)) return "rejected edit changed the session";
            return {};
        }
        return "edit " + t.control_id + "." + t.key + " = '" + iv.text + "' raised " +
               std::string(to_string(e.code())) + (loosens ? " instead of RelaxationRejected" : "");
    }
    if (loosens) return "loosening edit " + t.control_id + "." + t.key + " = '" + iv.text + "' accepted";
    return {};
}

} // namespace tsp::prop
