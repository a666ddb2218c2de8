#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tsp/advisor/client.hpp"
#include "tsp/advisor/draft.hpp"
#include "tsp/catalog.hpp"
#include "tsp/decision.hpp"
#include "tsp/matrix.hpp"
#include "tsp/passport.hpp"
#include "tsp/rag/index.hpp"
#include "tsp/rag/prompt.hpp"

namespace tsp::gateway {

enum class Stage { Queued, Retrieving, Advising, Reconciling, Done, Failed };
std::string_view to_string(Stage s) noexcept;

struct DeriveOptions {
    matrix::Thresholds thresholds;
    rag::PromptConfig prompt;
    std::string timestamp;
};

/// Optional advisor path. With no client the profile is the rule-engine draft.
struct AdvisorPath {
    const rag::VectorIndex* index = nullptr; ///< may be null: prompts then carry no context
    rag::Embedder* embedder = nullptr;
    advisor::AdvisorClient* client = nullptr;
};

struct DeriveResult {
    Category category = Category::Low;
    profiling::RequirementSet requirements;
    matrix::WorkingMatrix matrix;
    passport::CompletenessReport completeness;
    decision::TargetProfile rule_draft;
    std::vector<rag::PromptBundle> prompts;
    std::vector<advisor::DraftDecision> drafts;
    std::vector<advisor::ValidationReport> reports;
    std::map<std::string, std::string> request_errors;
    decision::TargetProfile profile;
};

/// Full derivation: categorize, select the baseline, expand the matrix, run the rule
/// engine and, when an advisor is configured, retrieve, prompt, validate and reconcile.
DeriveResult derive(const passport::SystemModel& model, const catalog::Catalog& catalog, const DeriveOptions& options,
                    const AdvisorPath& advisor = {}, const std::function<void(Stage)>& progress = {});

nlohmann::ordered_json to_json(const DeriveResult& r);

} // namespace tsp::gateway
