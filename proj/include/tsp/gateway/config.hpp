#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "tsp/advisor/backend.hpp"
#include "tsp/advisor/client.hpp"
#include "tsp/matrix.hpp"
#include "tsp/rag/chunk.hpp"
#include "tsp/rag/embedder.hpp"
#include "tsp/rag/prompt.hpp"

namespace tsp::gateway {

struct EmbedderConfig {
    std::string kind = "hash"; ///< hash | remote
    std::size_t dimension = 256;
    rag::RemoteEmbedderConfig remote;
};

struct AdvisorConfig {
    std::string kind = "none"; ///< none | scripted | remote
    std::filesystem::path fixture_dir;
    advisor::RemoteChatConfig remote;
    advisor::ClientConfig client;
};

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    /// Environment variable holding a static bearer token; empty disables auth.
    std::string bearer_token_env;
    std::size_t workers = 2;
    std::filesystem::path static_dir;
};

/// Runtime configuration. Relative paths are resolved against the config file's directory.
struct Config {
    std::filesystem::path data_dir = "data";
    std::filesystem::path catalog;
    std::filesystem::path index; ///< defaults to data_dir/index.tspidx
    matrix::Thresholds thresholds;
    rag::CleanConfig clean;
    rag::ChunkConfig chunking;
    rag::PromptConfig prompt;
    EmbedderConfig embedder;
    AdvisorConfig advisor;
    ServerConfig server;
};

/// Strict parse; unknown keys are rejected. Throws Error(ConfigError).
Config parse_config(std::string_view raw, const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& path);

/// `explicit_path` if given, else $TSP_CONFIG, else nullopt.
std::optional<std::filesystem::path> locate_config(const std::string& explicit_path);

std::unique_ptr<rag::Embedder> make_embedder(const EmbedderConfig& config);

/// nullptr for kind "none". Remote backends fail here, before any network use, when the
/// credential variable is unset.
std::unique_ptr<advisor::Backend> make_backend(const AdvisorConfig& config);

} // namespace tsp::gateway
