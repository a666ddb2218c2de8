#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tsp::rag {

using Vector = std::vector<double>;

/// Maps texts to L2-normalized vectors of a fixed dimension.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dimension() const = 0;
    /// One unit vector per text. Throws Error(EmbeddingError) for texts that yield no
    /// features, Error(DimensionMismatch) when a backend returns the wrong width.
    virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
};

/// Deterministic offline embedder: word tokens, lowercased, FNV-1a hashed into buckets,
/// counted and normalized.
class HashEmbedder final : public Embedder {
public:
    explicit HashEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}
    std::string name() const override { return "hash-" + std::to_string(dimension_); }
    std::size_t dimension() const override { return dimension_; }
    std::vector<Vector> embed(const std::vector<std::string>& texts) override;

    /// Bucket a single token lands in; exposed so tests can build disjoint-support texts.
    std::size_t bucket(std::string_view token) const;

private:
    std::size_t dimension_;
};

/// Word tokens of `text`, lowercased, in order.
std::vector<std::string> tokenize(std::string_view text);

struct RemoteEmbedderConfig {
    std::string base_url;
    std::string model;
    std::size_t dimension = 0;
    std::string credential_env; ///< name of the environment variable holding the API key
    std::chrono::milliseconds timeout{30000};
};

/// OpenAI-style /v1/embeddings client.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config);
    std::string name() const override { return "remote:" + config_.model; }
    std::size_t dimension() const override { return config_.dimension; }
    std::vector<Vector> embed(const std::vector<std::string>& texts) override;

private:
    RemoteEmbedderConfig config_;
};

/// Scales `v` to unit length. Throws Error(EmbeddingError) for the zero vector.
void normalize(Vector& v);

double dot(const Vector& a, const Vector& b);

} // namespace tsp::rag
