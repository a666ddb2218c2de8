#include "tsp/rag/embedder.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>

#include "json.hpp"
#include "tsp/error.hpp"
#include "tsp/http_client.hpp"
#include "tsp/utf8.hpp"

namespace tsp::rag {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::u32string cur;
    for (char32_t c : utf8::decode(text)) {
        if (utf8::is_word_char(c)) {
            cur.push_back(utf8::to_lower(c));
        } else if (!cur.empty()) {
            out.push_back(utf8::encode(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(utf8::encode(cur));
    return out;
}

std::size_t HashEmbedder::bucket(std::string_view token) const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : token) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h % dimension_);
}

std::vector<Vector> HashEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        Vector v(dimension_, 0.0);
        const auto tokens = tokenize(t);
        if (tokens.empty()) throw Error(ErrorCode::EmbeddingError, "text has no word tokens to embed");
        for (const auto& tok : tokens) v[bucket(tok)] += 1.0;
        normalize(v);
        out.push_back(std::move(v));
    }
    return out;
}

void normalize(Vector& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) throw Error(ErrorCode::EmbeddingError, "cannot normalize a zero vector");
    const double n = std::sqrt(sq);
    for (double& x : v) x /= n;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, "vector dimensions differ",
                    {{"expected", a.size()}, {"actual", b.size()}});
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty() || config_.model.empty() || config_.dimension == 0) {
        throw Error(ErrorCode::ConfigError, "remote embedder needs base_url, model and dimension");
    }
}

std::vector<Vector> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
    http::Request req;
    req.base_url = config_.base_url;
    req.path = "/v1/embeddings";
    req.timeout = config_.timeout;
    if (!config_.credential_env.empty()) {
        const char* key = std::getenv(config_.credential_env.c_str());
        if (!key || !*key) {
            throw Error(ErrorCode::ConfigError,
                        "environment variable " + config_.credential_env + " holding the embedder credential is not set");
        }
        req.headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
    req.body = nlohmann::json{{"model", config_.model}, {"input", texts}}.dump();
    const auto res = http::post_json(req);
    if (res.status != 200) {
        throw Error(ErrorCode::BackendUnavailable, "embedding backend returned HTTP " + std::to_string(res.status));
    }
    std::vector<Vector> out;
    try {
        const auto j = nlohmann::json::parse(res.body);
        for (const auto& item : j.at("data")) out.push_back(item.at("embedding").get<Vector>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BackendUnavailable, std::string("malformed embedding response: ") + e.what());
    }
    if (out.size() != texts.size()) {
        throw Error(ErrorCode::BackendUnavailable, "embedding backend returned a different number of vectors");
    }
    for (auto& v : out) {
        if (v.size() != config_.dimension) {
            throw Error(ErrorCode::DimensionMismatch, "embedding backend returned the wrong dimension",
                        {{"expected", config_.dimension}, {"actual", v.size()}});
        }
        normalize(v);
    }
    return out;
}

} // namespace tsp::rag
