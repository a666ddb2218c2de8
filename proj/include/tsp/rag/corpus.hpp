#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tsp/rag/chunk.hpp"
#include "tsp/rag/embedder.hpp"
#include "tsp/rag/index.hpp"

namespace tsp::rag {

struct ManifestEntry {
    std::string doc_id;
    std::string title;
    std::string date;
    std::string path; ///< relative to the corpus directory
};

/// Reads `<dir>/manifest.json`: an array of {doc_id, title, date, path}.
/// Throws Error(SchemaError) or Error(IoError).
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& corpus_dir);

struct IngestReport {
    std::size_t documents = 0;
    std::size_t chunks = 0;
    std::size_t indexed = 0;
    /// Chunk ids left out of the index because they carry no word tokens.
    std::vector<std::string> skipped;
};

/// Cleans, chunks and embeds every manifest document into `index`.
IngestReport ingest_corpus(const std::filesystem::path& corpus_dir, const CleanConfig& clean_config,
                           const ChunkConfig& chunk_config, Embedder& embedder, VectorIndex& index);

} // namespace tsp::rag
