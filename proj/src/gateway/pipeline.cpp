#include "tsp/gateway/pipeline.hpp"

#include <set>

#include "tsp/error.hpp"
#include "tsp/profiling.hpp"

namespace tsp::gateway {

std::string_view to_string(Stage s) noexcept {
    switch (s) {
    case Stage::Queued: return "queued";
    case Stage::Retrieving: return "retrieving";
    case Stage::Advising: return "advising";
    case Stage::Reconciling: return "reconciling";
    case Stage::Done: return "done";
    case Stage::Failed: return "failed";
    }
    return "failed";
}

DeriveResult derive(const passport::SystemModel& model, const catalog::Catalog& catalog, const DeriveOptions& options,
                    const AdvisorPath& advisor, const std::function<void(Stage)>& progress) {
    auto report = [&](Stage s) {
        if (progress) progress(s);
    };
    DeriveResult r;
    r.category = profiling::categorize(model);
    r.requirements = profiling::derive_requirements(model);
    const auto baseline = catalog.baseline_for(r.category);
    r.matrix = matrix::expand_baseline(baseline, model, r.requirements, r.category, options.thresholds, catalog);
    r.completeness = passport::completeness(model, catalog);

    decision::Provenance prov;
    prov.catalog_version = catalog.version();
    prov.passport_digest = passport::passport_digest(model);
    prov.timestamp = options.timestamp;
    prov.advisor = advisor.client ? advisor.client->backend_name() : "none";
    r.rule_draft = decision::build_rule_draft(r.matrix, model, r.requirements, catalog, r.category, prov);

    if (!advisor.client) {
        r.profile = r.rule_draft;
        return r;
    }

    report(Stage::Retrieving);
    for (const auto& row : r.matrix.rows) {
        std::vector<rag::RetrievalHit> hits;
        if (advisor.index && advisor.embedder && advisor.index->size() > 0) {
            hits = advisor.index->search(*advisor.embedder, rag::retrieval_query(row, model), options.prompt.top_k);
        }
        r.prompts.push_back(rag::assemble_prompt(row, model, hits, options.prompt));
    }

    report(Stage::Advising);
    const auto outcomes = advisor.client->request_all(r.prompts);

    report(Stage::Reconciling);
    advisor::PromptCitations citations;
    for (const auto& p : r.prompts) citations[p.control_id] = p.cited_chunk_ids;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& id = r.prompts[i].control_id;
        if (!outcomes[i].response) {
            r.request_errors[id] = std::string(tsp::to_string(*outcomes[i].error)) + ": " + outcomes[i].error_message;
            continue;
        }
        try {
            auto drafts = advisor::parse_response(*outcomes[i].response);
            r.drafts.insert(r.drafts.end(), drafts.begin(), drafts.end());
        } catch (const Error& e) {
            r.request_errors[id] = std::string(tsp::to_string(e.code())) + ": " + e.what();
        }
    }
    std::set<std::string> baseline_ids;
    for (const auto& c : baseline) baseline_ids.insert(c.id);
    r.reports = advisor::validate_draft(r.drafts, citations, catalog, baseline_ids, r.completeness);
    r.profile = advisor::reconcile(r.rule_draft, r.drafts, r.reports, r.request_errors);
    return r;
}

nlohmann::ordered_json to_json(const DeriveResult& r) {
    nlohmann::ordered_json j;
    j["category"] = tsp::to_string(r.category);
    j["completeness"] = passport::to_json(r.completeness);
    j["matrix"] = matrix::to_json(r.matrix);
    j["prompts"] = nlohmann::ordered_json::array();
    for (const auto& p : r.prompts) {
        j["prompts"].push_back({{"control_id", p.control_id}, {"digest", p.digest}, {"cited_chunk_ids", p.cited_chunk_ids}});
    }
    j["validation"] = nlohmann::ordered_json::array();
    for (const auto& v : r.reports) j["validation"].push_back(advisor::to_json(v));
    j["request_errors"] = r.request_errors;
    return j;
}

} // namespace tsp::gateway
