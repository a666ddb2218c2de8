#include "tsp/rag/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "tsp/error.hpp"
#include "tsp/json_reader.hpp"

namespace tsp::rag {

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& corpus_dir) {
    const auto j = json_io::parse(read_file(corpus_dir / "manifest.json"));
    if (!j.is_array()) json_io::fail(ErrorCode::SchemaError, "$", "manifest must be an array");
    std::vector<ManifestEntry> out;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < j.size(); ++i) {
        json_io::ObjectReader r(j[i], json_io::ObjectReader::element("$", i));
        ManifestEntry e;
        e.doc_id = r.required_string("doc_id");
        e.title = r.required_string("title");
        e.date = r.required_string("date");
        e.path = r.required_string("path");
        r.finish();
        if (!ids.insert(e.doc_id).second) r.fail(r.child("doc_id"), "duplicate doc_id '" + e.doc_id + "'");
        out.push_back(std::move(e));
    }
    return out;
}

IngestReport ingest_corpus(const std::filesystem::path& corpus_dir, const CleanConfig& clean_config,
                           const ChunkConfig& chunk_config, Embedder& embedder, VectorIndex& index) {
    IngestReport report;
    for (const auto& doc : read_manifest(corpus_dir)) {
        const auto cleaned = clean(read_file(corpus_dir / doc.path), clean_config);
        auto chunks = chunk(doc.doc_id, cleaned, chunk_config, doc.date);
        ++report.documents;
        report.chunks += chunks.size();
        std::vector<Chunk> keep;
        std::vector<std::string> texts;
        for (auto& c : chunks) {
            if (tokenize(c.text).empty()) {
                report.skipped.push_back(c.chunk_id);
                continue;
            }
            texts.push_back(c.text);
            keep.push_back(std::move(c));
        }
        const auto vectors = texts.empty() ? std::vector<Vector>{} : embedder.embed(texts);
        report.indexed += index.add(keep, vectors);
    }
    return report;
}

} // namespace tsp::rag
