#include "forge.hpp"

#include <algorithm>

#include "generators.hpp"
#include "support.hpp"
#include "tsp/digest.hpp"
#include "tsp/error.hpp"
#include "tsp/gateway/pipeline.hpp"

namespace tsp::forge {

using nlohmann::ordered_json;
using Rng = std::mt19937_64;

namespace {

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

// Baseline minimums of the fixture's interval parameters, in seconds.
const std::map<std::string, std::pair<std::string, std::int64_t>> kIntervalParams{
    {"AC-2", {"account_disable", 86400}},
    {"IR-6", {"reporting_time", 2 * 3600}},
    {"IR-3", {"test_frequency", 365 * 86400}},
};

ordered_json honest_draft(const Setup& s, const decision::TargetControlRecord& rec, Rng& rng) {
    ordered_json d;
    d["control_id"] = rec.control_id;
    d["decision"] = decision::to_string(rec.decision);
    d["target_params"] = decision::params_to_json(rec.target_params);
    d["enhancements"] = rec.enhancements;
    d["rationale"] = "Consistent with the retrieved guidance.";
    const auto& pool = s.citations.at(rec.control_id);
    d["cited_chunk_ids"] = std::vector<std::string>(pool.begin(), pool.begin() + 1 + pick(rng, pool.size()));
    d["confidence"] = 0.5 + 0.1 * static_cast<double>(pick(rng, 5));
    if (rec.insufficiency) d["insufficiency"] = *rec.insufficiency;
    if (rec.compensation) {
        d["compensation"] = {{"compensating_control", rec.compensation->compensating_control},
                             {"justification", rec.compensation->justification}};
    }
    return d;
}

std::string wrap(const ordered_json& drafts, Rng& rng) {
    static const char* kPrefaces[] = {"", "Here is the draft.\n\n", "Analysis follows.\n```text\nnotes\n```\n"};
    return std::string(kPrefaces[pick(rng, 3)]) + "```tsp-draft\n" + drafts.dump(pick(rng, 2) ? 2 : -1) +
           "\n```\nEnd of response.\n";
}

std::vector<const decision::TargetControlRecord*> baseline_records(const Setup& s) {
    std::vector<const decision::TargetControlRecord*> out;
    for (const auto& r : s.rule_draft.records) {
        if (s.baseline_ids.contains(r.control_id)) out.push_back(&r);
    }
    return out;
}

} // namespace

Setup fixture_setup() {
    Setup s;
    s.catalog = test::fixture_catalog();
    s.model = test::fixture_passport("passport_gaps.json");
    gateway::DeriveOptions opts;
    opts.timestamp = test::kFixedTimestamp;
    const auto r = gateway::derive(s.model, s.catalog, opts);
    s.rule_draft = r.profile;
    s.completeness = r.completeness;
    for (const auto& row : r.matrix.rows) {
        s.baseline_ids.insert(row.control.id);
        auto& ids = s.citations[row.control.id];
        for (int i = 0; i < 3; ++i) ids.push_back("c-" + sha256_hex(row.control.id + std::to_string(i)).substr(0, 16));
    }
    return s;
}

std::string honest_response(const Setup& s, Rng& rng) {
    ordered_json arr = ordered_json::array();
    for (const auto* rec : baseline_records(s)) arr.push_back(honest_draft(s, *rec, rng));
    return wrap(arr, rng);
}

ForgedCase forge(const Setup& s, Rng& rng) {
    const auto recs = baseline_records(s);
    ordered_json arr = ordered_json::array();
    for (const auto* rec : recs) arr.push_back(honest_draft(s, *rec, rng));

    ForgedCase c;
    std::size_t target = pick(rng, recs.size());
    auto& d = arr[target];
    c.control_id = recs[target]->control_id;

    switch (pick(rng, 8)) {
    case 0: {
        c.expected = "TraceabilityViolation";
        if (pick(rng, 2)) {
            c.mutation = "cites an id outside every prompt";
            d["cited_chunk_ids"].push_back("c-" + std::to_string(100000 + rng() % 900000) + "deadbeef00");
        } else {
            c.mutation = "cites a chunk shown only to another control";
            const auto& other = recs[(target + 1) % recs.size()]->control_id;
            d["cited_chunk_ids"].push_back(s.citations.at(other).back());
        }
        break;
    }
    case 1: {
        c.expected = "UnknownControl";
        switch (pick(rng, 3)) {
        case 0:
            c.mutation = "control id absent from the catalog";
            d["control_id"] = "ZZ-" + std::to_string(1 + rng() % 99);
            break;
        case 1:
            c.mutation = "catalog control outside the baseline";
            d["control_id"] = "CA-3";
            d["target_params"] = ordered_json::object();
            d["enhancements"] = ordered_json::array();
            d.erase("insufficiency");
            break;
        default:
            c.mutation = "enhancement the control does not list";
            d["enhancements"].push_back(pick(rng, 2) ? "AC-19(5)" : c.control_id + "(42)");
            break;
        }
        break;
    }
    case 2: {
        c.expected = "RelaxationAttempt";
        auto it = kIntervalParams.begin();
        std::advance(it, static_cast<long>(pick(rng, kIntervalParams.size())));
        target = static_cast<std::size_t>(
            std::find_if(recs.begin(), recs.end(), [&](const auto* r) { return r->control_id == it->first; }) -
            recs.begin());
        c.control_id = it->first;
        const auto looser = gen::interval_longer_than(rng, it->second.second);
        arr[target]["target_params"][it->second.first] = looser.text;
        c.mutation = "sets " + it->second.first + " to '" + looser.text + "'";
        break;
    }
    case 3: {
        c.expected = "SchemaViolation";
        c.control_id.clear();
        switch (pick(rng, 6)) {
        case 0: c.mutation = "unknown field"; d["severity"] = "high"; break;
        case 1: c.mutation = "unknown decision label"; d["decision"] = "Maybe"; break;
        case 2: c.mutation = "missing rationale"; d.erase("rationale"); break;
        case 3: c.mutation = "parameters as a list"; d["target_params"] = ordered_json::array({"x"}); break;
        case 4: c.mutation = "confidence out of range"; d["confidence"] = 1.5; break;
        default: c.mutation = "citations as a string"; d["cited_chunk_ids"] = "c-1"; break;
        }
        break;
    }
    case 4: {
        c.expected = "SchemaViolation";
        switch (pick(rng, 3)) {
        case 0: c.mutation = "parameter the control does not define"; d["target_params"]["bogus_param"] = "x"; break;
        case 1:
            c.mutation = "Compensate without a compensation object";
            d["decision"] = "Compensate";
            d.erase("compensation");
            break;
        default: c.mutation = "Add for a baseline control"; d["decision"] = "Add"; break;
        }
        break;
    }
    case 5: {
        c.expected = "MissingInsufficiencyFlag";
        target = static_cast<std::size_t>(
            std::find_if(recs.begin(), recs.end(), [](const auto* r) { return r->control_id == "AC-2"; }) -
            recs.begin());
        c.control_id = "AC-2";
        arr[target].erase("insufficiency");
        arr[target].erase("needs_clarification");
        c.mutation = "drops the flag for a known passport gap";
        break;
    }
    case 6: {
        c.expected = "NoStructuredBlock";
        c.control_id.clear();
        const auto body = arr.dump();
        switch (pick(rng, 3)) {
        case 0: c.mutation = "plain JSON fence"; c.response = "```json\n" + body + "\n```\n"; break;
        case 1: c.mutation = "no fence"; c.response = "Decision: keep everything.\n" + body; break;
        default: c.mutation = "unterminated fence"; c.response = "```tsp-draft\n" + body; break;
        }
        return c;
    }
    default: {
        c.expected = "SchemaViolation";
        c.control_id.clear();
        c.mutation = "truncated JSON";
        const auto body = arr.dump();
        c.response = "```tsp-draft\n" + body.substr(0, body.size() / 2) + "\n```\n";
        return c;
    }
    }
    c.response = wrap(arr, rng);
    c.mutation += " (draft " + std::to_string(target) + ")";
    return c;
}

Verdict judge(const Setup& s, const ForgedCase& c) {
    Verdict v;
    std::vector<advisor::DraftDecision> drafts;
    try {
        drafts = advisor::parse_response(c.response);
    } catch (const Error& e) {
        v.observed = std::string(to_string(e.code()));
        v.caught = v.observed == c.expected;
        return v;
    }
    const auto reports = advisor::validate_draft(drafts, s.citations, s.catalog, s.baseline_ids, s.completeness);
    bool forged_seen = false;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        const bool forged = c.control_id.empty() ? false : drafts[i].control_id == c.control_id ||
                                                               !s.baseline_ids.contains(drafts[i].control_id);
        if (!forged) {
            if (r.status != advisor::ValidationStatus::Valid) v.observed += "collateral rejection of " + r.control_id + "; ";
            continue;
        }
        forged_seen = true;
        for (const auto& viol : r.violations) v.observed += std::string(advisor::to_string(viol.kind)) + " ";
        v.observed += "-> " + std::string(advisor::to_string(r.status));
        v.false_accept = r.status == advisor::ValidationStatus::Valid;
        v.caught = !v.false_accept && std::any_of(r.violations.begin(), r.violations.end(), [&](const auto& x) {
            return advisor::to_string(x.kind) == c.expected;
        });
    }
    if (!forged_seen) {
        v.false_accept = true;
        v.observed += "forged draft accepted without report";
    }
    if (v.observed.find("collateral") != std::string::npos) v.caught = false;
    return v;
}

} // namespace tsp::forge
