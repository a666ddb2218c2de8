#include "tsp/gateway/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tsp/error.hpp"
#include "tsp/json_reader.hpp"

namespace tsp::gateway {

namespace {

using json_io::ObjectReader;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::size_t read_size(ObjectReader& r, std::string_view key, std::size_t fallback) {
    const auto v = r.optional_number(key);
    if (!v) return fallback;
    if (*v < 0 || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
        r.fail(r.child(key), "expected a non-negative integer");
    }
    return static_cast<std::size_t>(*v);
}

std::chrono::milliseconds read_ms(ObjectReader& r, std::string_view key, std::chrono::milliseconds fallback) {
    return std::chrono::milliseconds(read_size(r, key, static_cast<std::size_t>(fallback.count())));
}

} // namespace

Config parse_config(std::string_view raw, const std::filesystem::path& base) {
    const auto j = json_io::parse(raw, ErrorCode::ConfigError);
    ObjectReader r(j, "$", ErrorCode::ConfigError);
    Config c;
    c.data_dir = resolve(base, r.optional_string("data_dir").value_or("data"));
    c.catalog = resolve(base, r.required_string("catalog"));
    c.index = resolve(base, r.optional_string("index").value_or(""));
    if (c.index.empty()) c.index = c.data_dir / "index.tspidx";

    if (const auto* t = r.object("thresholds", false)) {
        ObjectReader tr(*t, r.child("thresholds"), ErrorCode::ConfigError);
        c.thresholds.relevance = tr.optional_number("relevance").value_or(c.thresholds.relevance);
        c.thresholds.risk = tr.optional_number("risk").value_or(c.thresholds.risk);
        c.thresholds.equivalence = tr.optional_number("equivalence").value_or(c.thresholds.equivalence);
        c.thresholds.gap_coverage = tr.optional_number("gap_coverage").value_or(c.thresholds.gap_coverage);
        tr.finish();
    }
    c.thresholds.validate();

    if (const auto* ch = r.object("chunking", false)) {
        ObjectReader cr(*ch, r.child("chunking"), ErrorCode::ConfigError);
        if (auto s = cr.optional_string("strategy")) c.chunking.strategy = rag::parse_chunk_strategy(*s);
        c.chunking.size = read_size(cr, "size", c.chunking.size);
        c.chunking.overlap = read_size(cr, "overlap", c.chunking.overlap);
        if (cr.raw("abbreviations")) c.chunking.abbreviations = cr.string_array("abbreviations", false);
        if (cr.raw("strip_patterns")) c.clean.strip_patterns = cr.string_array("strip_patterns", false);
        cr.finish();
    }
    c.chunking.validate();

    if (const auto* rt = r.object("retrieval", false)) {
        ObjectReader rr(*rt, r.child("retrieval"), ErrorCode::ConfigError);
        c.prompt.top_k = static_cast<int>(read_size(rr, "top_k", static_cast<std::size_t>(c.prompt.top_k)));
        c.prompt.max_chars = read_size(rr, "max_prompt_chars", c.prompt.max_chars);
        c.prompt.template_id = rr.optional_string("template").value_or(c.prompt.template_id);
        rr.finish();
        if (c.prompt.top_k < 1) rr.fail(rr.child("top_k"), "must be at least 1");
    }

    if (const auto* e = r.object("embedder", false)) {
        ObjectReader er(*e, r.child("embedder"), ErrorCode::ConfigError);
        c.embedder.kind = er.optional_string("kind").value_or("hash");
        c.embedder.dimension = read_size(er, "dimension", 256);
        c.embedder.remote.base_url = er.optional_string("base_url").value_or("");
        c.embedder.remote.model = er.optional_string("model").value_or("");
        c.embedder.remote.credential_env = er.optional_string("credential_env").value_or("");
        c.embedder.remote.timeout = read_ms(er, "timeout_ms", c.embedder.remote.timeout);
        c.embedder.remote.dimension = c.embedder.dimension;
        er.finish();
        if (c.embedder.kind != "hash" && c.embedder.kind != "remote") {
            er.fail(er.child("kind"), "expected hash or remote");
        }
    }

    if (const auto* a = r.object("advisor", false)) {
        ObjectReader ar(*a, r.child("advisor"), ErrorCode::ConfigError);
        c.advisor.kind = ar.optional_string("kind").value_or("none");
        c.advisor.fixture_dir = resolve(base, ar.optional_string("fixture_dir").value_or(""));
        c.advisor.remote.base_url = ar.optional_string("base_url").value_or("");
        c.advisor.remote.model = ar.optional_string("model").value_or("");
        c.advisor.remote.credential_env = ar.optional_string("credential_env").value_or("");
        c.advisor.remote.timeout = read_ms(ar, "timeout_ms", c.advisor.remote.timeout);
        c.advisor.client.max_requests = static_cast<int>(read_size(ar, "max_requests", 0));
        c.advisor.client.max_retries = static_cast<int>(read_size(ar, "max_retries", 3));
        c.advisor.client.initial_backoff = read_ms(ar, "initial_backoff_ms", c.advisor.client.initial_backoff);
        c.advisor.client.parallelism = read_size(ar, "parallelism", 4);
        ar.finish();
        if (c.advisor.kind != "none" && c.advisor.kind != "scripted" && c.advisor.kind != "remote") {
            ar.fail(ar.child("kind"), "expected none, scripted or remote");
        }
        if (c.advisor.client.parallelism == 0) ar.fail(ar.child("parallelism"), "must be at least 1");
    }

    if (const auto* s = r.object("server", false)) {
        ObjectReader sr(*s, r.child("server"), ErrorCode::ConfigError);
        c.server.host = sr.optional_string("host").value_or(c.server.host);
        c.server.port = static_cast<int>(read_size(sr, "port", static_cast<std::size_t>(c.server.port)));
        c.server.bearer_token_env = sr.optional_string("bearer_token_env").value_or("");
        c.server.workers = read_size(sr, "workers", c.server.workers);
        c.server.static_dir = resolve(base, sr.optional_string("static_dir").value_or(""));
        sr.finish();
        if (c.server.workers == 0) sr.fail(sr.child("workers"), "must be at least 1");
    }
    r.finish();
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::optional<std::filesystem::path> locate_config(const std::string& explicit_path) {
    if (!explicit_path.empty()) return std::filesystem::path(explicit_path);
    if (const char* env = std::getenv("TSP_CONFIG"); env && *env) return std::filesystem::path(env);
    return std::nullopt;
}

std::unique_ptr<rag::Embedder> make_embedder(const EmbedderConfig& config) {
    if (config.kind == "remote") return std::make_unique<rag::RemoteEmbedder>(config.remote);
    return std::make_unique<rag::HashEmbedder>(config.dimension);
}

std::unique_ptr<advisor::Backend> make_backend(const AdvisorConfig& config) {
    if (config.kind == "scripted") return std::make_unique<advisor::ScriptedBackend>(config.fixture_dir);
    if (config.kind == "remote") return std::make_unique<advisor::RemoteChatBackend>(config.remote);
    return nullptr;
}

} // namespace tsp::gateway
