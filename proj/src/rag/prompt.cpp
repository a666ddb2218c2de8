#include "tsp/rag/prompt.hpp"

#include <cctype>
#include <set>

#include "tsp/digest.hpp"
#include "tsp/error.hpp"

namespace tsp::rag {

namespace {

constexpr const char* kInstructions = R"(You assist a security engineer in deriving a target security profile.
Work on exactly one control: the one described under CONTROL ROW.

Rules:
- Rely only on the SYSTEM PASSPORT EXCERPT and the REGULATORY CONTEXT blocks below. Do not assume facts that are not stated there.
- Choose one decision from: Keep, Refine, Enhance, Add, Compensate.
- Never set a duration or frequency parameter weaker than its baseline value.
- Only cite chunk ids that appear in a REGULATORY CONTEXT block.
- If the passport lacks information needed to judge this control, say so: list the open questions in "needs_clarification" and the missing passport fields in "insufficiency".

Response format: prose is allowed, but the answer must contain one fenced block tagged tsp-draft holding a JSON array with one object per control:
```tsp-draft
[{"control_id": "...", "decision": "Keep|Refine|Enhance|Add|Compensate",
  "target_params": {"<param key>": "<value>"}, "enhancements": ["..."],
  "rationale": "...", "cited_chunk_ids": ["c-..."],
  "confidence": 0.0, "needs_clarification": ["..."], "insufficiency": ["..."],
  "compensation": {"compensating_control": "...", "justification": "..."}}]
```
Fields confidence, needs_clarification, insufficiency and compensation are optional.
)";

nlohmann::ordered_json passport_excerpt(const matrix::MatrixRow& row, const passport::SystemModel& model) {
    const auto full = passport::to_json(model);
    nlohmann::ordered_json j;
    j["system_name"] = model.system_name;
    j["context_tags"] = nlohmann::ordered_json::array();
    for (auto t : model.context_tags) j["context_tags"].push_back(to_string(t));
    std::set<std::string> fields(row.context.fields.begin(), row.context.fields.end());
    fields.insert("admin_roles");
    for (const auto& f : fields) {
        constexpr std::string_view kProc = "procedures.";
        if (std::string_view(f).starts_with(kProc)) {
            const auto name = f.substr(kProc.size());
            const auto& procs = full["procedures"];
            j[f] = procs.contains(name) ? procs[name] : nlohmann::ordered_json(nullptr);
        } else if (full.contains(f)) {
            j[f] = full[f];
        } else {
            j[f] = nullptr;
        }
    }
    if (const auto* d = model.find_infeasible(row.control.id)) {
        j["infeasible"] = {{"control_id", d->control_id}, {"reason", d->reason}};
    }
    return j;
}

std::string citation_block(std::size_t n, const RetrievalHit& h) {
    std::string out = "[C" + std::to_string(n) + "] chunk_id=" + h.chunk.chunk_id + " doc=" + h.chunk.doc_id;
    if (!h.chunk.metadata.doc_date.empty()) out += " date=" + h.chunk.metadata.doc_date;
    std::string_view text = h.chunk.text;
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    out += "\n";
    out += text;
    out += "\n\n";
    return out;
}

} // namespace

std::string retrieval_query(const matrix::MatrixRow& row, const passport::SystemModel& model) {
    std::string q = row.control.id + " " + row.control.name;
    for (auto t : model.context_tags) q += " " + std::string(to_string(t));
    return q;
}

PromptBundle assemble_prompt(const matrix::MatrixRow& row, const passport::SystemModel& model,
                             const std::vector<RetrievalHit>& hits, const PromptConfig& config) {
    if (config.template_id != kDefaultTemplate) {
        throw Error(ErrorCode::TemplateUnknown, "unknown prompt template '" + config.template_id + "'",
                    {{"template_id", config.template_id}});
    }
    std::string head = "### INSTRUCTIONS\n";
    head += kInstructions;
    head += "\n### CONTROL ROW\n" + matrix::to_json(row).dump(2) + "\n";
    head += "\n### SYSTEM PASSPORT EXCERPT\n" + passport_excerpt(row, model).dump(2) + "\n";
    head += "\n### REGULATORY CONTEXT\n";

    const std::string empty_context = std::string(kNoContextMarker) +
                                      ". Base the draft on the passport only and flag insufficiency for anything "
                                      "the passport does not settle.\n";

    std::size_t keep = hits.size();
    std::string body;
    for (;;) {
        body.clear();
        for (std::size_t i = 0; i < keep; ++i) body += citation_block(i + 1, hits[i]);
        if (keep == 0) body = empty_context;
        if (keep == 0 || head.size() + body.size() <= config.max_chars) break;
        --keep;
    }

    PromptBundle out;
    out.control_id = row.control.id;
    out.text = head + body;
    for (std::size_t i = 0; i < keep; ++i) out.cited_chunk_ids.push_back(hits[i].chunk.chunk_id);
    out.digest = sha256_hex(out.text);
    return out;
}

} // namespace tsp::rag
