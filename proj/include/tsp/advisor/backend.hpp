#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "tsp/rag/prompt.hpp"

namespace tsp::advisor {

/// One completion per prompt. Transport problems throw Error(BackendUnavailable) or
/// Error(Timeout); details["transient"] = false marks failures a retry cannot fix.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    virtual std::string complete(const rag::PromptBundle& prompt) = 0;
};

/// Replays canned responses: `<dir>/<prompt digest>.txt`, else `<dir>/control-<id>.txt`.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(std::filesystem::path dir);
    std::string name() const override { return "scripted:" + dir_.filename().string(); }
    std::string complete(const rag::PromptBundle& prompt) override;

private:
    std::filesystem::path dir_;
};

struct RemoteChatConfig {
    std::string base_url;
    std::string model;
    /// Environment variable holding the API key; the key itself is never stored.
    std::string credential_env;
    std::chrono::milliseconds timeout{120000};
};

/// Chat-completions client (POST {base_url}/v1/chat/completions, temperature 0).
class RemoteChatBackend final : public Backend {
public:
    /// Throws Error(ConfigError) when the URL or model is empty or the credential variable
    /// is unset, so a misconfigured run stops before any network activity.
    explicit RemoteChatBackend(RemoteChatConfig config);
    std::string name() const override { return "remote:" + config_.model; }
    std::string complete(const rag::PromptBundle& prompt) override;

private:
    RemoteChatConfig config_;
    std::string credential_;
};

} // namespace tsp::advisor
