#include "tsp/rag/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

#include <zlib.h>

#include "tsp/error.hpp"

namespace tsp::rag {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'P', 'I', 'D', 'X', '0', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_f64(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

std::uint32_t crc(const std::string& bytes) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

bool better(double sa, const std::string& ida, double sb, const std::string& idb) {
    if (sa != sb) return sa > sb;
    return ida < idb;
}

} // namespace

bool SearchFilters::empty() const noexcept {
    return !section && !control_id && !doc_id && !family && !date_from && !date_to;
}

bool SearchFilters::matches(const Chunk& c) const {
    const auto& m = c.metadata;
    auto contains = [](const std::vector<std::string>& v, const std::string& x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    };
    if (section && !contains(m.section_path, *section)) return false;
    if (control_id && !contains(m.control_ids, *control_id)) return false;
    if (doc_id && c.doc_id != *doc_id) return false;
    if (family && !contains(m.families, *family)) return false;
    if (date_from && (m.doc_date.empty() || m.doc_date < *date_from)) return false;
    if (date_to && (m.doc_date.empty() || m.doc_date > *date_to)) return false;
    return true;
}

SearchFilters SearchFilters::from_json(const nlohmann::json& j) {
    SearchFilters f;
    if (j.is_null()) return f;
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "filters must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it->is_string()) {
            throw Error(ErrorCode::SchemaError, "filter '" + it.key() + "' must be a string");
        }
        const auto v = it->get<std::string>();
        const auto& k = it.key();
        if (k == "section") f.section = v;
        else if (k == "control_id") f.control_id = v;
        else if (k == "doc_id") f.doc_id = v;
        else if (k == "family") f.family = v;
        else if (k == "date_from") f.date_from = v;
        else if (k == "date_to") f.date_to = v;
        else throw Error(ErrorCode::FilterFieldUnknown, "unknown filter field '" + k + "'", {{"field", k}});
    }
    return f;
}

VectorIndex::VectorIndex(std::string embedder_name, std::size_t dimension)
    : embedder_name_(std::move(embedder_name)), dimension_(dimension) {
    if (dimension_ == 0) throw Error(ErrorCode::ConfigError, "index dimension must be positive");
}

VectorIndex::VectorIndex(VectorIndex&& other) noexcept
    : embedder_name_(std::move(other.embedder_name_)),
      dimension_(other.dimension_),
      chunks_(std::move(other.chunks_)),
      vectors_(std::move(other.vectors_)),
      by_id_(std::move(other.by_id_)) {}

std::size_t VectorIndex::size() const {
    std::shared_lock lock(mutex_);
    return chunks_.size();
}

std::size_t VectorIndex::add(const std::vector<Chunk>& chunks, const std::vector<Vector>& vectors) {
    if (chunks.size() != vectors.size()) {
        throw Error(ErrorCode::ConfigError, "chunk and vector counts differ");
    }
    for (const auto& v : vectors) {
        if (v.size() != dimension_) {
            throw Error(ErrorCode::DimensionMismatch, "vector dimension does not match the index",
                        {{"expected", dimension_}, {"actual", v.size()}});
        }
        double sq = 0.0;
        for (double x : v) sq += x * x;
        if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
            throw Error(ErrorCode::EmbeddingError, "index vectors must be L2-normalized");
        }
    }
    std::unique_lock lock(mutex_);
    std::size_t added = 0;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (by_id_.contains(chunks[i].chunk_id)) continue;
        by_id_.emplace(chunks[i].chunk_id, chunks_.size());
        chunks_.push_back(chunks[i]);
        vectors_.push_back(vectors[i]);
        ++added;
    }
    return added;
}

std::vector<RetrievalHit> VectorIndex::search_vector(const Vector& query, int k, const SearchFilters& filters) const {
    if (k < 1) throw Error(ErrorCode::ConfigError, "k must be at least 1", {{"k", k}});
    if (query.size() != dimension_) {
        throw Error(ErrorCode::DimensionMismatch, "query dimension does not match the index",
                    {{"expected", dimension_}, {"actual", query.size()}});
    }
    std::shared_lock lock(mutex_);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        if (!filters.matches(chunks_[i])) continue;
        scored.emplace_back(dot(query, vectors_[i]), i);
    }
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [&](const auto& a, const auto& b) {
                          return better(a.first, chunks_[a.second].chunk_id, b.first, chunks_[b.second].chunk_id);
                      });
    std::vector<RetrievalHit> hits;
    hits.reserve(take);
    for (std::size_t r = 0; r < take; ++r) hits.push_back({chunks_[scored[r].second], scored[r].first, r + 1});
    return hits;
}

std::vector<RetrievalHit> VectorIndex::search(Embedder& embedder, const std::string& query, int k,
                                              const SearchFilters& filters) const {
    if (embedder.dimension() != dimension_ || embedder.name() != embedder_name_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "embedder " + embedder.name() + " does not match index embedder " + embedder_name_,
                    {{"expected", dimension_}, {"actual", embedder.dimension()}});
    }
    if (k < 1) throw Error(ErrorCode::ConfigError, "k must be at least 1", {{"k", k}});
    const auto q = embedder.embed({query});
    return search_vector(q.front(), k, filters);
}

std::optional<Chunk> VectorIndex::find(const std::string& chunk_id) const {
    std::shared_lock lock(mutex_);
    auto it = by_id_.find(chunk_id);
    if (it == by_id_.end()) return std::nullopt;
    return chunks_[it->second];
}

std::vector<std::pair<Chunk, Vector>> VectorIndex::entries() const {
    std::shared_lock lock(mutex_);
    std::vector<std::pair<Chunk, Vector>> out;
    out.reserve(chunks_.size());
    for (std::size_t i = 0; i < chunks_.size(); ++i) out.emplace_back(chunks_[i], vectors_[i]);
    return out;
}

void VectorIndex::save(const std::filesystem::path& path) const {
    std::shared_lock lock(mutex_);
    std::string buf(kMagic, sizeof kMagic);
    put_u32(buf, kFormatVersion);
    put_u32(buf, static_cast<std::uint32_t>(dimension_));
    put_u32(buf, static_cast<std::uint32_t>(embedder_name_.size()));
    buf += embedder_name_;
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        const auto json = to_json(chunks_[i]).dump();
        std::string payload;
        put_u32(payload, static_cast<std::uint32_t>(json.size()));
        payload += json;
        for (double x : vectors_[i]) put_f64(payload, x);
        put_u32(buf, static_cast<std::uint32_t>(payload.size()));
        put_u32(buf, crc(payload));
        buf += payload;
    }
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write index file " + tmp);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw Error(ErrorCode::IoError, "short write to index file " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open index file " + path.string());
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    auto corrupt = [&](const std::string& what) {
        return Error(ErrorCode::CorruptIndex, "index file " + path.string() + ": " + what);
    };
    if (buf.size() < 20 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) throw corrupt("bad header");
    if (get_u32(buf.data() + 8) != kFormatVersion) throw corrupt("unsupported format version");
    const auto dim = get_u32(buf.data() + 12);
    const auto name_len = get_u32(buf.data() + 16);
    if (20 + static_cast<std::size_t>(name_len) > buf.size()) throw corrupt("truncated header");
    VectorIndex index(buf.substr(20, name_len), dim);

    std::size_t pos = 20 + name_len;
    std::vector<Chunk> chunks;
    std::vector<Vector> vectors;
    while (pos + 8 <= buf.size()) {
        const auto len = get_u32(buf.data() + pos);
        const auto sum = get_u32(buf.data() + pos + 4);
        if (pos + 8 + len > buf.size()) break; // torn tail from an interrupted write
        const auto payload = buf.substr(pos + 8, len);
        if (crc(payload) != sum) throw corrupt("checksum mismatch at offset " + std::to_string(pos));
        if (payload.size() < 4) throw corrupt("record too short");
        const auto json_len = get_u32(payload.data());
        if (4 + static_cast<std::size_t>(json_len) + 8ull * dim != payload.size()) throw corrupt("record size mismatch");
        try {
            chunks.push_back(chunk_from_json(nlohmann::json::parse(payload.substr(4, json_len))));
        } catch (const nlohmann::json::exception& e) {
            throw corrupt(std::string("record JSON: ") + e.what());
        } catch (const Error& e) {
            throw corrupt(std::string("record JSON: ") + e.what());
        }
        Vector v(dim);
        for (std::size_t d = 0; d < dim; ++d) v[d] = get_f64(payload.data() + 4 + json_len + 8 * d);
        vectors.push_back(std::move(v));
        pos += 8 + len;
    }
    index.add(chunks, vectors);
    return index;
}

} // namespace tsp::rag
