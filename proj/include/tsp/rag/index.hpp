#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tsp/rag/chunk.hpp"
#include "tsp/rag/embedder.hpp"

namespace tsp::rag {

struct RetrievalHit {
    Chunk chunk;
    double score = 0.0;
    std::size_t rank = 0; ///< 1-based
};

/// Exact-match metadata predicates; unset fields do not constrain.
struct SearchFilters {
    std::optional<std::string> section;    ///< equals some heading on the chunk's section path
    std::optional<std::string> control_id; ///< listed in the chunk's control ids
    std::optional<std::string> doc_id;
    std::optional<std::string> family;
    std::optional<std::string> date_from;  ///< inclusive, ISO date compare
    std::optional<std::string> date_to;    ///< inclusive

    bool matches(const Chunk& c) const;
    bool empty() const noexcept;

    /// Throws Error(FilterFieldUnknown) for keys outside the fields above.
    static SearchFilters from_json(const nlohmann::json& j);
};

/// In-memory flat index with exact cosine search. Reads may run concurrently; add() takes
/// an exclusive lock.
class VectorIndex {
public:
    VectorIndex(std::string embedder_name, std::size_t dimension);

    VectorIndex(const VectorIndex&) = delete;
    VectorIndex& operator=(const VectorIndex&) = delete;
    VectorIndex(VectorIndex&& other) noexcept;

    const std::string& embedder_name() const noexcept { return embedder_name_; }
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const;

    /// Vectors must be unit length with the index dimension (Error(DimensionMismatch)).
    /// Chunks whose id is already present are skipped. Returns the number added.
    std::size_t add(const std::vector<Chunk>& chunks, const std::vector<Vector>& vectors);

    /// Top-k by score descending, ties by chunk_id ascending, over chunks passing `filters`.
    /// Throws Error(ConfigError) when k < 1.
    std::vector<RetrievalHit> search_vector(const Vector& query, int k, const SearchFilters& filters = {}) const;

    /// Embeds `query` with `embedder` (whose name and dimension must match) and searches.
    std::vector<RetrievalHit> search(Embedder& embedder, const std::string& query, int k,
                                     const SearchFilters& filters = {}) const;

    std::optional<Chunk> find(const std::string& chunk_id) const;

    /// Snapshot of all stored (chunk, vector) pairs in insertion order.
    std::vector<std::pair<Chunk, Vector>> entries() const;

    /// Writes the whole index as a fresh record log (atomic rename).
    void save(const std::filesystem::path& path) const;

    /// Loads a record log. A truncated final record is ignored; a checksum mismatch on a
    /// complete record throws Error(CorruptIndex).
    static VectorIndex load(const std::filesystem::path& path);

private:
    std::string embedder_name_;
    std::size_t dimension_;
    mutable std::shared_mutex mutex_;
    std::vector<Chunk> chunks_;
    std::vector<Vector> vectors_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

} // namespace tsp::rag
