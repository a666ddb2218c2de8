#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tsp::rag {

struct CleanConfig {
    /// ECMAScript patterns removed from every line, applied until nothing matches.
    std::vector<std::string> strip_patterns{R"(Page \d+)"};
};

/// Normalizes a raw document: Unicode spaces become ASCII spaces, runs of horizontal
/// whitespace collapse to one space, lines are trimmed, header/footer patterns are removed
/// and blank-line runs shrink to a single blank line. Idempotent.
/// Throws Error(InvalidEncoding) for malformed UTF-8.
std::string clean(std::string_view raw, const CleanConfig& config = {});

enum class ChunkStrategy { Character, Sentence, Structure };

std::string_view to_string(ChunkStrategy s) noexcept;
/// Throws Error(ConfigError) for unknown names.
ChunkStrategy parse_chunk_strategy(std::string_view s);

struct ChunkConfig {
    ChunkStrategy strategy = ChunkStrategy::Structure;
    std::size_t size = 1000;
    std::size_t overlap = 200; ///< character strategy only
    std::vector<std::string> abbreviations{"e.g.", "i.e.", "Mr.", "Mrs.", "Dr.", "No.", "vs.", "cf.", "Art.", "Fig.", "Sec."};

    /// Throws Error(ConfigError) when size is 0 or overlap >= size.
    void validate() const;
};

/// Half-open range of code-point offsets into the cleaned document.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;
    friend bool operator==(const Span&, const Span&) = default;
};

struct ChunkMetadata {
    std::vector<std::string> section_path;
    std::vector<std::string> control_ids;
    std::string doc_date;
    std::vector<std::string> families;
    friend bool operator==(const ChunkMetadata&, const ChunkMetadata&) = default;
};

struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    /// Character and sentence chunks: exactly the spanned source text. Structure chunks:
    /// the heading path on its own line, then the spanned source text.
    std::string text;
    Span span;
    ChunkMetadata metadata;
    friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// "c-" plus the first 16 hex digits of SHA-256 over (doc_id, span, text).
std::string make_chunk_id(std::string_view doc_id, Span span, std::string_view text);

/// Sentence segments tiling [0, text.size()): each segment keeps its trailing whitespace.
/// A boundary follows '.', '?' or '!' when whitespace then an uppercase letter (or the end
/// of text) comes next and the word ending there is not a listed abbreviation. Blank lines
/// and Markdown heading lines are boundaries as well.
std::vector<Span> sentence_segments(std::u32string_view text, const std::vector<std::string>& abbreviations);

/// Splits a cleaned document. `doc_date` is copied into every chunk's metadata.
/// Throws Error(ConfigError) for an invalid config, Error(InvalidEncoding) for bad UTF-8.
std::vector<Chunk> chunk(std::string_view doc_id, std::string_view text, const ChunkConfig& config,
                         std::string_view doc_date = {});

/// Control identifiers such as AC-2 or AC-2(5) mentioned in `text`, sorted and unique.
std::vector<std::string> find_control_ids(std::string_view text);

nlohmann::ordered_json to_json(const Chunk& c);
/// Throws Error(SchemaError).
Chunk chunk_from_json(const nlohmann::json& j);

} // namespace tsp::rag
