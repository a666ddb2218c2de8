#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tsp/matrix.hpp"
#include "tsp/passport.hpp"
#include "tsp/rag/index.hpp"

namespace tsp::rag {

inline constexpr const char* kDefaultTemplate = "tsp-control-v1";
inline constexpr const char* kNoContextMarker = "NO REGULATORY CONTEXT RETRIEVED";

struct PromptConfig {
    std::string template_id = kDefaultTemplate;
    std::size_t max_chars = 24000;
    int top_k = 4;
};

struct PromptBundle {
    std::string control_id;
    std::string text;
    /// Exactly the chunks rendered as citation blocks, in [C1..Ck] order.
    std::vector<std::string> cited_chunk_ids;
    /// SHA-256 of text.
    std::string digest;
};

/// Control id, name and the system's active context tags.
std::string retrieval_query(const matrix::MatrixRow& row, const passport::SystemModel& model);

/// Renders the per-control prompt. Hits are included in rank order; when the text would
/// exceed max_chars the lowest-ranked hits are dropped first.
/// Throws Error(TemplateUnknown).
PromptBundle assemble_prompt(const matrix::MatrixRow& row, const passport::SystemModel& model,
                             const std::vector<RetrievalHit>& hits, const PromptConfig& config = {});

} // namespace tsp::rag
